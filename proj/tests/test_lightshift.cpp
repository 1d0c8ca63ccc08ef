#include <doctest.h>

#include <vector>

#include "sns/lightshift.hpp"

using namespace sns;

namespace {

SimParams strong() {
  SimParams p;
  p.rabi_hz = 70e6;
  p.detuning_hz = 1.5e9;
  p.larmor_hz = 3.1e6;
  return p;
}

}  // namespace

TEST_CASE("secular light shifts") {
  SimParams p = strong();
  LightShifts s = perturbative_shifts(p);
  CHECK(s.delta_minus1_hz == doctest::Approx(0.0));
  CHECK(s.delta_0_hz == doctest::Approx(272.2e3).epsilon(5e-4));
  CHECK(s.delta_plus1_hz == doctest::Approx(0.0));

  p.theta_deg = 90.0;
  s = perturbative_shifts(p);
  CHECK(s.delta_minus1_hz == doctest::Approx(136.1e3).epsilon(5e-4));
  CHECK(std::abs(s.delta_0_hz) < 1e-9);
  CHECK(s.delta_plus1_hz == doctest::Approx(136.1e3).epsilon(5e-4));

  p.rabi_hz = 0.0;
  s = perturbative_shifts(p);
  CHECK(s.delta_0_hz == 0.0);
  CHECK(s.delta_plus1_hz == 0.0);

  p = strong();
  p.theta_deg = 30.0;
  p.detuning_hz = -1.5e9;
  s = perturbative_shifts(p);
  CHECK(s.delta_0_hz < 0.0);
  CHECK(s.delta_plus1_hz < 0.0);

  p.detuning_hz = 0.0;
  CHECK_THROWS_AS(perturbative_shifts(p), DomainError);
}

TEST_CASE("magic angle") {
  CHECK(magic_angle() == doctest::Approx(54.7356).epsilon(1e-6));
  SimParams p = strong();
  p.theta_deg = magic_angle();
  const LightShifts s = perturbative_shifts(p);
  CHECK(frequencies_from_shifts(p.larmor_hz, s).splitting_hz < 1e-6);
}

TEST_CASE("exact eigenfrequencies") {
  SimParams p = strong();
  p.rabi_hz = 0.0;
  EigenFrequencies e = exact_eigenfrequencies(p);
  CHECK(e.nu_plus_hz == doctest::Approx(3.1e6).epsilon(1e-9));
  CHECK(e.nu_minus_hz == doctest::Approx(3.1e6).epsilon(1e-9));

  p = strong();
  e = exact_eigenfrequencies(p);
  CHECK(e.splitting_hz == doctest::Approx(544e3).epsilon(6.0 / 544.0));
  CHECK(e.splitting_hz == doctest::Approx(2.0 * perturbative_shifts(p).delta_0_hz).epsilon(0.01));
  // the +-1 states are dark at theta = 0
  CHECK(e.nu_plus_hz + e.nu_minus_hz == doctest::Approx(2.0 * p.larmor_hz).epsilon(1e-6));

  p.theta_deg = magic_angle();
  CHECK(exact_eigenfrequencies(p).splitting_hz < 3e3);

  p.larmor_hz = 0.0;
  CHECK_THROWS_AS(exact_eigenfrequencies(p), DomainError);
}

TEST_CASE("ordering reverses across the magic angle") {
  SimParams p = strong();
  p.theta_deg = 40.0;
  const int below = exact_eigenfrequencies(p).ordering;
  p.theta_deg = 70.0;
  const int above = exact_eigenfrequencies(p).ordering;
  CHECK(below != 0);
  CHECK(below == -above);
}

TEST_CASE("splitting symmetries and scaling") {
  SimParams p = strong();
  for (double th : {10.0, 33.0, 71.0}) {
    p.theta_deg = th;
    const double s = exact_eigenfrequencies(p).splitting_hz;
    p.theta_deg = 180.0 - th;
    CHECK(exact_eigenfrequencies(p).splitting_hz == doctest::Approx(s).epsilon(1e-6));
    p.theta_deg = 360.0 - th;
    CHECK(exact_eigenfrequencies(p).splitting_hz == doctest::Approx(s).epsilon(1e-6));
  }
  p = strong();
  p.rabi_hz = 30e6;
  const double s1 = exact_eigenfrequencies(p).splitting_hz;
  p.rabi_hz = 60e6;
  CHECK(exact_eigenfrequencies(p).splitting_hz / s1 == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("phase convention leaves the eigenfrequencies unchanged") {
  SimParams p = strong();
  for (double th : {0.0, 25.0, 54.0, 90.0}) {
    p.theta_deg = th;
    const EigenFrequencies a = exact_eigenfrequencies(p, make_operator_set());
    const EigenFrequencies b = exact_eigenfrequencies(p, make_operator_set({1.0, 0.2, -2.5}));
    CHECK(a.nu_plus_hz == doctest::Approx(b.nu_plus_hz).epsilon(1e-12));
    CHECK(a.nu_minus_hz == doctest::Approx(b.nu_minus_hz).epsilon(1e-12));
  }
}

TEST_CASE("sweeps") {
  SimParams p = strong();
  SUBCASE("power") {
    const SweepResult r = splitting_vs(SweepVariable::power, p, {1.0, 2.0, 3.0, 4.0, 5.0});
    REQUIRE(r.trend);
    CHECK(r.trend->law == TrendLaw::linear);
    CHECK(r.trend->coefficient == doctest::Approx(180e3).epsilon(0.02));
    CHECK(r.trend->r_squared > 0.999);
    for (std::size_t k = 1; k < r.points.size(); ++k)
      CHECK(r.points[k].freqs.splitting_hz > r.points[k - 1].freqs.splitting_hz);
  }
  SUBCASE("detuning") {
    p.power_mw = 3.0;
    const SweepResult r = splitting_vs(SweepVariable::detuning, resolve_power(p), {1e9, 1.5e9, 2e9, 2.5e9, 3e9});
    REQUIRE(r.trend);
    CHECK(r.trend->law == TrendLaw::hyperbolic);
    CHECK(r.trend->r_squared > 0.99);
    const double ref = r.points.front().freqs.splitting_hz * r.points.front().parameter;
    for (const auto& pt : r.points) CHECK(pt.freqs.splitting_hz * pt.parameter == doctest::Approx(ref).epsilon(0.05));
  }
  SUBCASE("theta") {
    std::vector<double> grid;
    for (int k = 0; k <= 90; ++k) grid.push_back(k);
    const SweepResult r = splitting_vs(SweepVariable::theta, p, grid);
    CHECK_FALSE(r.trend);
    const auto z = signed_splitting_zero(r);
    REQUIRE(z);
    CHECK(*z == doctest::Approx(54.74).epsilon(0.5 / 54.74));
  }
  SUBCASE("no crossing") {
    const SweepResult r = splitting_vs(SweepVariable::theta, p, {0.0, 10.0, 20.0});
    CHECK_FALSE(signed_splitting_zero(r));
  }
}

TEST_CASE("sweep value application") {
  SimParams p = strong();
  SimParams q = apply_sweep_value(p, SweepVariable::power, 2.0);
  CHECK(q.power_mw.value() == 2.0);
  CHECK(q.rabi_hz == doctest::Approx(power_to_rabi(2.0)));
  CHECK(apply_sweep_value(p, SweepVariable::theta, 12.0).theta_deg == 12.0);
  CHECK(apply_sweep_value(p, SweepVariable::detuning, 2e9).detuning_hz == 2e9);
  CHECK(sweep_variable_from_string(to_string(SweepVariable::detuning)) == SweepVariable::detuning);
  CHECK_THROWS_AS(sweep_variable_from_string("field"), DomainError);
}

TEST_CASE("trend fits") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y;
  for (double v : x) y.push_back(220e3 * v);
  TrendFit t = fit_trend(x, y, TrendLaw::linear);
  CHECK(t.coefficient == doctest::Approx(220e3).epsilon(1e-14));
  CHECK(t.r_squared == doctest::Approx(1.0));

  y.clear();
  for (double v : x) y.push_back(4e14 / v);
  t = fit_trend(x, y, TrendLaw::hyperbolic);
  CHECK(t.coefficient == doctest::Approx(4e14).epsilon(1e-14));
  CHECK(t.r_squared == doctest::Approx(1.0));

  const std::vector<double> same{2, 2, 2}, y3{1, 2, 3};
  CHECK_THROWS_AS(fit_trend(same, y3, TrendLaw::linear), DomainError);
  const std::vector<double> with_zero{0, 1, 2};
  CHECK_THROWS_AS(fit_trend(with_zero, y3, TrendLaw::hyperbolic), DomainError);
  const std::vector<double> two{1, 2}, y2{1, 2};
  CHECK_THROWS_AS(fit_trend(two, y2, TrendLaw::linear), DomainError);
  CHECK(trend_law_from_string("hyperbolic") == TrendLaw::hyperbolic);
}
