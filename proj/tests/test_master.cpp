#include <doctest.h>

#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "sns/detection.hpp"
#include "sns/lightshift.hpp"
#include "sns/master.hpp"
#include "support.hpp"

using namespace sns;

namespace {

DensityMatrix random_density(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat4 a;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a(i, j) = cplx(g(rng), g(rng));
  Mat4 rho = a * a.adjoint();
  return rho / rho.trace();
}

double trace_rate(const Liouvillian& l, const DensityMatrix& rho) {
  return std::abs(unvec(l.generator * vec(rho) + l.source).trace());
}

}  // namespace

TEST_CASE("column-stacking vectorization") {
  std::mt19937_64 rng(3);
  const Mat4 a = random_density(rng), x = random_density(rng), b = random_density(rng);
  CHECK((unvec(vec(x)) - x).norm() < 1e-15);
  CHECK(vec(x)(1) == x(1, 0));
  Eigen::Matrix<cplx, 16, 16> kron;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) kron.block<4, 4>(4 * i, 4 * j) = b(j, i) * a;
  CHECK((vec(a * x * b) - kron * vec(x)).norm() < 1e-12);
}

TEST_CASE("density checks") {
  CHECK_NOTHROW(check_density(transit_reference()));
  Mat4 bad = transit_reference();
  bad(0, 1) = 0.1;
  CHECK_THROWS_AS(check_density(bad), DomainError);
  bad = transit_reference() * 1.1;
  CHECK_THROWS_AS(check_density(bad), DomainError);
  bad = Mat4::Zero();
  bad(0, 0) = 1.5;
  bad(1, 1) = -0.5;
  CHECK_THROWS_AS(check_density(bad), DomainError);
}

TEST_CASE("Liouvillian invariants") {
  std::mt19937_64 rng(11);
  SimParams p;
  p.rabi_hz = 70e6;
  p.theta_deg = 30.0;
  const Liouvillian l = build_liouvillian(p);
  for (int k = 0; k < 5; ++k) CHECK(trace_rate(l, random_density(rng)) < 1e-9 * kTwoPi * p.gamma_hz);
  for (const cplx& ev : liouvillian_spectrum(l)) CHECK(ev.real() <= 1e-9);

  const DensityMatrix ss = steady_state(l);
  CHECK_NOTHROW(check_density(ss));
  CHECK(std::abs(ss.trace() - 1.0) < 1e-10);
}

TEST_CASE("dissipator is completely positive") {
  std::mt19937_64 rng(5);
  const Mat4 c = random_density(rng) - random_density(rng) * cplx(0.0, 1.0);
  const Mat16 d = dissipator(c);
  // Choi matrix of the jump part c X c^dagger; the anticommutator part is
  // conditionally negative and does not enter.
  Mat16 choi = Mat16::Zero();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      Mat4 e = Mat4::Zero();
      e(i, j) = 1.0;
      const Mat4 img = c * e * c.adjoint();
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) choi(4 * i + a, 4 * j + b) = img(a, b);
    }
  Eigen::SelfAdjointEigenSolver<Mat16> es(choi);
  CHECK(es.eigenvalues().minCoeff() > -1e-10);
  // and the full superoperator matches its definition
  const Mat4 x = random_density(rng);
  const Mat4 cdc = c.adjoint() * c;
  const Mat4 expected = c * x * c.adjoint() - 0.5 * (cdc * x + x * cdc);
  CHECK((unvec(d * vec(x)) - expected).norm() < 1e-12);
}

TEST_CASE("steady state") {
  SimParams p;
  p.rabi_hz = 0.0;
  CHECK((steady_state(build_liouvillian(p)) - transit_reference()).norm() < 1e-12);

  SUBCASE("excited population at large detuning") {
    p.rabi_hz = 70e6;
    const DensityMatrix ss = steady_state(build_liouvillian(p));
    // two-level saturation of the pi-coupled |0>_x (population ~1/3) with
    // Rabi frequency Omega/sqrt(3)
    const double w2 = p.rabi_hz * p.rabi_hz / 3.0, d = p.detuning_hz, g = p.gamma_hz;
    const double two_level = 0.25 * w2 / (d * d + 0.25 * g * g + 0.5 * w2);
    const double oracle = ss(kZero, kZero).real() * two_level;
    CHECK(ss(kExcited, kExcited).real() == doctest::Approx(oracle).epsilon(0.02));
  }

  SUBCASE("no transit term") {
    p.rabi_hz = 70e6;
    const Liouvillian l = build_liouvillian(p, make_operator_set(), TransitTerm::none);
    CHECK_THROWS_AS(steady_state(l), SingularError);
  }

  SUBCASE("long-time limit") {
    p.rabi_hz = 5e6;
    p.detuning_hz = 50e6;
    p.transit_hz = 400e3;
    p.theta_deg = 20.0;
    const Liouvillian l = build_liouvillian(p);
    const double t = 20.0 / (kTwoPi * p.transit_hz);
    const DensityMatrix exact = evolve_exact(transit_reference(), l, t);
    CHECK((exact - steady_state(l)).cwiseAbs().maxCoeff() < 1e-8);

    double max_eig = 0.0;
    for (const cplx& ev : liouvillian_spectrum(l)) max_eig = std::max(max_eig, std::abs(ev));
    const double dt = 0.04 / max_eig;
    const auto steps = static_cast<std::size_t>(std::ceil(t / dt));
    const auto traj = propagate(transit_reference(), l, t / static_cast<double>(steps), steps);
    CHECK((traj.back() - steady_state(l)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("propagation") {
  std::mt19937_64 rng(17);
  SimParams p;
  p.rabi_hz = 5e6;
  p.detuning_hz = 40e6;
  p.theta_deg = 65.0;
  p.transit_hz = 200e3;
  const Liouvillian l = build_liouvillian(p);

  SUBCASE("RK4 agrees with the matrix exponential") {
    double max_eig = 0.0;
    for (const cplx& ev : liouvillian_spectrum(l)) max_eig = std::max(max_eig, std::abs(ev));
    const double dt = 0.02 / max_eig;
    for (int k = 0; k < 3; ++k) {
      const DensityMatrix rho = random_density(rng);
      const auto traj = propagate(rho, l, dt, 2000);
      CHECK(traj.size() == 2001);
      CHECK((traj.back() - evolve_exact(rho, l, 2000 * dt)).cwiseAbs().maxCoeff() < 1e-8);
    }
  }

  SUBCASE("step size guard names the limit") {
    try {
      propagate(transit_reference(), l, 1e-6, 1);
      FAIL("expected StepSizeError");
    } catch (const StepSizeError& e) {
      CHECK(std::string(e.what()).find("rad/s") != std::string::npos);
    }
  }

  SUBCASE("zero generator is the identity map") {
    const Liouvillian zero;
    const DensityMatrix rho = random_density(rng);
    const auto traj = propagate(rho, zero, 1e-3, 10);
    CHECK((traj.back() - rho).norm() < 1e-15);
  }

  SUBCASE("homogeneous propagator") {
    const double t = 1e-7;
    const Vec16 v = vec(random_density(rng));
    const Vec16 a = propagator(l, t) * v;
    const Vec16 b = (Mat16(l.generator * t)).exp() * v;
    CHECK((a - b).norm() < 1e-10);
  }
}

TEST_CASE("free precession") {
  // Omega = 0, start in |+1>_z: <jz>(t) = cos(2pi nu_L t) exp(-gamma_t t)
  SimParams p;
  p.rabi_hz = 0.0;
  const OperatorSet o = make_operator_set();
  const Liouvillian l = build_liouvillian(p, o);
  const Observable jz = faraday_observable(o);
  Mat3 pz = Mat3::Zero();
  pz(0, 0) = 1.0;
  const DensityMatrix rho = embed_ground(o.to_x(pz));
  for (double t : {0.0, 0.11e-6, 1.3e-6, 7.7e-6, 25e-6}) {
    const double expected = std::cos(kTwoPi * p.larmor_hz * t) * std::exp(-kTwoPi * p.transit_hz * t);
    CHECK(signal(evolve_exact(rho, l, t), jz) == doctest::Approx(expected).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("light-shifted precession beats at nu+ and nu-") {
  SimParams p;
  p.rabi_hz = 70e6;
  p.transit_hz = 10e3;
  const OperatorSet o = make_operator_set();
  const Liouvillian l = build_liouvillian(p, o);
  const EigenFrequencies ef = exact_eigenfrequencies(p, o);

  SUBCASE("Liouvillian spectrum contains 2pi nu+-") {
    for (double nu : {ef.nu_plus_hz, ef.nu_minus_hz}) {
      double best = 1e30;
      for (const cplx& ev : liouvillian_spectrum(l)) best = std::min(best, std::abs(std::abs(ev.imag()) / kTwoPi - nu));
      CHECK(best < 100.0);
    }
  }

  SUBCASE("trajectory DFT") {
    Mat3 pz = Mat3::Zero();
    pz(0, 0) = 1.0;
    const Vec16 start = vec(embed_ground(o.to_x(pz)));
    const double dt = 20e-9;
    const Mat16 step = propagator(l, dt);
    const Eigen::Matrix<cplx, 1, 16> r = faraday_observable(o).row();
    const Vec16 ss = vec(steady_state(l));
    std::vector<double> x;
    Vec16 v = start;
    for (int k = 0; k < 10000; ++k) {
      x.push_back((r * (v - ss))(0).real());
      v = step * v;
    }
    const double lo = test::dft_peak(x, dt, p.larmor_hz - 600e3, p.larmor_hz);
    const double hi = test::dft_peak(x, dt, p.larmor_hz, p.larmor_hz + 600e3);
    CHECK(lo == doctest::Approx(std::min(ef.nu_plus_hz, ef.nu_minus_hz)).epsilon(3e-3));
    CHECK(hi == doctest::Approx(std::max(ef.nu_plus_hz, ef.nu_minus_hz)).epsilon(3e-3));
  }
}
