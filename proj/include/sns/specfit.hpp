#pragma once

#include <span>
#include <string>
#include <vector>

#include "sns/noise.hpp"
#include "sns/trend.hpp"

namespace sns {

enum class PeakModel {
  hole,             // A L(f; c, w_b) - B L(f; c, w_h) + offset
  two_lorentzians,  // A [L(f; c - s/2, w) + L(f; c + s/2, w)] + offset
  single_lorentzian,
};

const char* to_string(PeakModel m);
PeakModel peak_model_from_string(const std::string& s);

/// Unit-height Lorentzian with full width at half maximum `fwhm`.
double lorentzian(double f, double center, double fwhm);

/// Evaluate a model on raw parameters (layout documented in specfit.cpp).
double evaluate_model(PeakModel m, std::span<const double> params, double f);

struct FitResult {
  PeakModel model = PeakModel::hole;
  double center_hz = 0.0;
  double splitting_hz = 0.0;          // distance between the two highest maxima of the fitted model
  double splitting_uncertainty_hz = 0.0;
  double width_broad_hz = 0.0;        // hole: broad FWHM; otherwise the peak FWHM
  double width_hole_hz = 0.0;         // hole: dip FWHM; otherwise equals width_broad_hz
  double amp_broad = 0.0;
  double amp_hole = 0.0;              // zero for the Lorentzian-sum models
  double offset = 0.0;
  double residual_rms = 0.0;
  bool single_peak = false;
  std::vector<double> maxima_hz;      // all maxima of the fitted model, ascending
  std::vector<double> params;         // raw model parameters
  int iterations = 0;
};

struct FitOptions {
  int max_iterations = 500;
  double param_tolerance = 1e-8;  // relative parameter change at convergence
  double cost_tolerance = 1e-12;  // relative cost reduction, actual and predicted
};

/// Nonlinear least-squares fit of the chosen model; the splitting is read
/// off the fitted curve's maxima and its uncertainty propagated from the
/// linearized covariance. Throws FitError on non-convergence or an
/// unphysical hole (B >= A), DomainError when the spectrum does not cover
/// three times its half-maximum extent.
FitResult fit_dual_peak(const Spectrum& s, PeakModel model, const FitOptions& opt = {});

}  // namespace sns
