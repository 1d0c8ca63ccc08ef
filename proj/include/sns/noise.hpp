#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sns/detection.hpp"
#include "sns/hamiltonian.hpp"
#include "sns/master.hpp"

namespace sns {

enum class SpectrumMethod { resolvent, stochastic };

const char* to_string(SpectrumMethod m);
SpectrumMethod spectrum_method_from_string(const std::string& s);

/// How atoms entering the beam are prepared.
enum class InjectionBasis {
  z_population,  // |m>_z with m uniform on {-1, 0, +1}
  random_axis,   // |m>_n with n uniform on the sphere, m uniform
};

const char* to_string(InjectionBasis b);
InjectionBasis injection_basis_from_string(const std::string& s);

/// One-sided power spectral density (scale^2 / Hz) of a polarimeter channel.
struct Spectrum {
  std::vector<double> freqs_hz;
  std::vector<double> psd;
  SimParams params;
  SpectrumMethod method = SpectrumMethod::resolvent;
  Channel channel = Channel::rotation;
  double rbw_hz = 0.0;
  std::size_t n_averages = 1;
  std::optional<double> signal_variance;  // stochastic route only

  /// Throws DomainError on empty, non-increasing, negative or mismatched data.
  void validate() const;
  double bin_width_hz() const;
};

/// Weighted pure states |psi><psi| (x-quantized 4x4) making up the injection
/// ensemble. Weights sum to 1 and the mean state is the transit reference.
struct InjectionEnsemble {
  std::vector<double> weights;
  std::vector<DensityMatrix> states;
};

/// z_population: the three z-basis projectors. random_axis: icosahedral
/// directions, which average every degree <= 5 polynomial in n exactly and so
/// reproduce the second moments of the uniform-sphere ensemble.
InjectionEnsemble injection_ensemble(InjectionBasis basis, const OperatorSet& ops);

struct ResolventOptions {
  InjectionBasis injection = InjectionBasis::z_population;
  double n_eff = 100.0;
  /// Ket phases of the operator set; the observable must come from the same set.
  std::array<double, 3> ket_phases{0.0, 0.0, 0.0};
};

/// Deterministic spin-noise spectrum from the linearized transit noise: each
/// entering atom kicks the state by (P - rho_ss)/N_eff at rate gamma_t N_eff,
/// and the kick propagates through the resolvent (i 2pi f - L)^-1. The
/// two-sided density is summed over +/-f.
Spectrum resolvent_spectrum(const SimParams& p, const Observable& a, std::span<const double> freqs_hz,
                            const ResolventOptions& opt = {});

struct StochasticOptions {
  InjectionBasis injection = InjectionBasis::z_population;
  std::size_t substeps = 8;          // event-placement substeps per sample
  std::size_t segment_length = 0;    // Welch segment; 0 picks the smallest power of two meeting the bin target
  double burn_in_correlation_times = 10.0;
  unsigned threads = 0;              // 0 = hardware concurrency
};

/// Monte Carlo spectrum: trajectories of the master equation without the
/// mean transit term, with Poisson injection events that replace 1/N_eff of
/// rho by a freshly drawn pure state. PSD by Welch (Hann, 50% overlap),
/// averaged over trajectories. Trajectory k uses an RNG keyed by
/// (rng_seed, k), so output is independent of the thread schedule.
Spectrum stochastic_spectrum(const SimParams& p, const Observable& a, const StochasticOptions& opt = {});

/// Segment length used by stochastic_spectrum for these params.
std::size_t welch_segment_length(const SimParams& p, const StochasticOptions& opt = {});

struct WelchResult {
  std::vector<double> freqs_hz;
  std::vector<double> psd;  // one-sided density
  std::size_t n_segments = 0;
};

/// Welch estimate with a periodic Hann window, 50% overlap and per-segment
/// mean removal.
WelchResult welch_psd(std::span<const double> x, double sample_rate_hz, std::size_t segment_length);

/// Restrict to freqs in [fmin, fmax].
Spectrum crop(const Spectrum& s, double fmin_hz, double fmax_hz);

/// Centered moving average over `width_hz`; rbw_hz becomes max(rbw, width).
Spectrum smooth(const Spectrum& s, double width_hz);

/// Local maxima whose topographic prominence exceeds `prominence_fraction`
/// of the global maximum, refined by a parabola through log-PSD. Throws
/// NoPeakError when none qualifies.
std::vector<double> spectrum_peak_positions(const Spectrum& s, double prominence_fraction = 0.1);

/// Linear interpolation of the PSD at f (clamped to the grid ends).
double psd_at(const Spectrum& s, double f_hz);

/// Sum of psd * bin width (trapezoidal).
double integrated_power(const Spectrum& s);

}  // namespace sns
