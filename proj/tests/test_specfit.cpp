#include <doctest.h>

#include <random>

#include "sns/hamiltonian.hpp"
#include "sns/lightshift.hpp"
#include "sns/specfit.hpp"
#include "support.hpp"

using namespace sns;

TEST_CASE("two Lorentzians round trip") {
  // unit Lorentzians at 2.83 and 3.37 MHz, 120 kHz wide
  const Spectrum s = test::synthetic(PeakModel::two_lorentzians, {3.1e6, 540e3, 120e3, 1.0, 0.0}, 1.6e6, 4.6e6);
  const FitResult r = fit_dual_peak(s, PeakModel::two_lorentzians);
  // the fitted curve's maxima sit slightly inside the generator centers
  std::vector<double> truth = test::linspace(3.1e6, 3.6e6, 500001);
  double best = 0.0, arg = 0.0;
  for (double f : truth) {
    const double v = evaluate_model(PeakModel::two_lorentzians, std::vector<double>{3.1e6, 540e3, 120e3, 1.0, 0.0}, f);
    if (v > best) best = v, arg = f;
  }
  CHECK(r.splitting_hz == doctest::Approx(540e3).epsilon(0.01));
  CHECK(r.splitting_hz == doctest::Approx(2.0 * (arg - 3.1e6)).epsilon(1e-5));
  CHECK(r.center_hz == doctest::Approx(3.1e6).epsilon(1e-7));
  CHECK(r.width_broad_hz == doctest::Approx(120e3).epsilon(1e-5));
  CHECK_FALSE(r.single_peak);
  CHECK(r.maxima_hz.size() == 2);
  CHECK(r.splitting_uncertainty_hz >= 0.0);
}

TEST_CASE("single Lorentzian input is flagged") {
  const Spectrum s = test::synthetic(PeakModel::single_lorentzian, {3.1e6, 100e3, 2.0, 0.1}, 2.1e6, 4.1e6);
  for (PeakModel m : {PeakModel::two_lorentzians, PeakModel::single_lorentzian}) {
    const FitResult r = fit_dual_peak(s, m);
    CHECK(r.single_peak);
    CHECK(r.splitting_hz == 0.0);
  }
}

TEST_CASE("hole model round trip") {
  const std::vector<double> truth{3.1e6, 700e3, 250e3, 2.0, 1.2, 0.05};
  const Spectrum s = test::synthetic(PeakModel::hole, truth, 0.6e6, 5.6e6, 2001);
  const FitResult r = fit_dual_peak(s, PeakModel::hole);
  const Spectrum fine = test::synthetic(PeakModel::hole, truth, 3.1e6, 3.6e6, 500001);
  const double arg = fine.freqs_hz[static_cast<std::size_t>(std::max_element(fine.psd.begin(), fine.psd.end()) - fine.psd.begin())];
  CHECK(r.splitting_hz == doctest::Approx(2.0 * (arg - 3.1e6)).epsilon(1e-4));
  CHECK(r.width_broad_hz == doctest::Approx(700e3).epsilon(1e-4));
  CHECK(r.width_hole_hz == doctest::Approx(250e3).epsilon(1e-4));
  CHECK(r.amp_hole < r.amp_broad);
}

TEST_CASE("noisy round trips") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g;
  int good = 0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    Spectrum s = test::synthetic(PeakModel::two_lorentzians, {3.1e6, 400e3, 100e3, 1.0, 0.0}, 1.6e6, 4.6e6);
    const double peak = *std::max_element(s.psd.begin(), s.psd.end());
    for (double& v : s.psd) v = std::max(0.0, v + 0.01 * peak * g(rng));
    const FitResult r = fit_dual_peak(s, PeakModel::two_lorentzians);
    const double truth = 2.0 * 0.5 * 400e3 * std::sqrt(std::max(0.0, 2.0 * std::sqrt(1.0 + std::pow(100e3 / 400e3, 2)) - 1.0 - std::pow(100e3 / 400e3, 2)));
    if (std::abs(r.splitting_hz - truth) < 0.02 * truth) ++good;
  }
  CHECK(good >= 19);
}

TEST_CASE("scale invariance") {
  Spectrum s = test::synthetic(PeakModel::two_lorentzians, {3.1e6, 500e3, 110e3, 1.0, 0.01}, 1.6e6, 4.6e6);
  const double base = fit_dual_peak(s, PeakModel::two_lorentzians).splitting_hz;
  for (double k : {1e-12, 3.0, 1e9}) {
    Spectrum t = s;
    for (double& v : t.psd) v *= k;
    CHECK(fit_dual_peak(t, PeakModel::two_lorentzians).splitting_hz == doctest::Approx(base).epsilon(1e-6));
  }
}

TEST_CASE("resolvent spectrum at 3 mW") {
  SimParams p;
  p.power_mw = 3.0;
  p = resolve_power(p);
  const OperatorSet o = make_operator_set();
  const auto grid = test::linspace(1.1e6, 5.1e6, 2001);
  const Spectrum s = resolvent_spectrum(p, faraday_observable(o), grid);
  const FitResult r = fit_dual_peak(s, PeakModel::two_lorentzians);
  CHECK(r.splitting_hz == doctest::Approx(2.0 * perturbative_shifts(p).delta_0_hz).epsilon(0.05));
}

TEST_CASE("hole model cannot describe a Lorentzian pair") {
  // A - B Lorentzians with a shared center have no stationary point with
  // B < A on a well-split pair; the fit either runs out of iterations or
  // lands on the unphysical side.
  const Spectrum s = test::synthetic(PeakModel::two_lorentzians, {3.1e6, 540e3, 120e3, 1.0, 0.0}, 1.6e6, 4.6e6);
  CHECK_THROWS_AS(fit_dual_peak(s, PeakModel::hole), FitError);
}

TEST_CASE("coverage and input checks") {
  const Spectrum narrow = test::synthetic(PeakModel::two_lorentzians, {3.1e6, 540e3, 120e3, 1.0, 0.0}, 2.6e6, 3.6e6);
  CHECK_THROWS_AS(fit_dual_peak(narrow, PeakModel::two_lorentzians), DomainError);
  Spectrum zero = narrow;
  std::fill(zero.psd.begin(), zero.psd.end(), 0.0);
  CHECK_THROWS_AS(fit_dual_peak(zero, PeakModel::two_lorentzians), DomainError);
  CHECK(peak_model_from_string("hole") == PeakModel::hole);
  CHECK_THROWS_AS(peak_model_from_string("voigt"), DomainError);
  CHECK(lorentzian(1.0, 1.0, 2.0) == 1.0);
  CHECK(lorentzian(2.0, 1.0, 2.0) == 0.5);
}
