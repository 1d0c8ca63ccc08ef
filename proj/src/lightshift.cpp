#include "sns/lightshift.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace sns {

LightShifts perturbative_shifts(const SimParams& p) {
  if (p.detuning_hz == 0.0) throw DomainError("perturbative_shifts: detuning must be nonzero");
  const double th = deg2rad(p.theta_deg);
  const double c2 = std::cos(th) * std::cos(th);
  const double s2 = std::sin(th) * std::sin(th);
  const double rabi2 = p.rabi_hz * p.rabi_hz;
  LightShifts s;
  s.delta_0_hz = c2 / 3.0 * rabi2 / (4.0 * p.detuning_hz);
  s.delta_plus1_hz = s2 / 3.0 * rabi2 / (8.0 * p.detuning_hz);
  s.delta_minus1_hz = s.delta_plus1_hz;
  return s;
}

EigenFrequencies frequencies_from_shifts(double larmor_hz, const LightShifts& s) {
  EigenFrequencies f;
  f.shifts = s;
  f.nu_plus_hz = larmor_hz + s.delta_plus1_hz - s.delta_0_hz;
  f.nu_minus_hz = larmor_hz + s.delta_0_hz - s.delta_minus1_hz;
  f.splitting_hz = std::abs(f.nu_plus_hz - f.nu_minus_hz);
  f.ordering = (f.nu_plus_hz > f.nu_minus_hz) - (f.nu_plus_hz < f.nu_minus_hz);
  return f;
}

EigenFrequencies exact_eigenfrequencies(const SimParams& p, const OperatorSet& ops) {
  if (!(p.larmor_hz > 0.0)) {
    throw DomainError("exact_eigenfrequencies: larmor_hz must be > 0 for state tracking");
  }
  const Mat4 h = build_hamiltonian(p, ops);
  Eigen::SelfAdjointEigenSolver<Mat4> es(h);
  const Eigen::Vector4d energies = es.eigenvalues();
  const Mat4& vecs = es.eigenvectors();

  // overlap(m, k) = |<m|dressed_k>|^2 for bare ground sublevels m
  Eigen::Matrix<double, 3, 4> overlap;
  for (int m = 0; m < 3; ++m)
    for (int k = 0; k < 4; ++k) overlap(m, k) = std::norm(vecs(m, k));

  // Exhaustive assignment of 3 bare states to 4 dressed states.
  std::array<int, 3> best{};
  double best_score = -1.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) {
        if (a == b || b == c || a == c) continue;
        const double score = overlap(0, a) + overlap(1, b) + overlap(2, c);
        if (score > best_score) {
          best_score = score;
          best = {a, b, c};
        }
      }

  for (int m = 0; m < 3; ++m) {
    int weak_claimants = 0;
    for (int k = 0; k < 4; ++k) {
      Eigen::Index arg = 0;
      const double top = overlap.col(k).maxCoeff(&arg);
      if (arg == m && top < 0.6) ++weak_claimants;
    }
    if (weak_claimants >= 2) {
      std::ostringstream os;
      os << "exact_eigenfrequencies: ambiguous dressed-state tracking for bare sublevel index " << m
         << "; overlap matrix |<bare|dressed>|^2 =\n"
         << overlap;
      throw TrackingError(os.str());
    }
  }

  const double e_plus = energies(best[0]) / kTwoPi;
  const double e_zero = energies(best[1]) / kTwoPi;
  const double e_minus = energies(best[2]) / kTwoPi;

  LightShifts s;
  s.delta_plus1_hz = e_plus - p.larmor_hz;
  s.delta_0_hz = e_zero;
  s.delta_minus1_hz = e_minus + p.larmor_hz;

  EigenFrequencies f;
  f.shifts = s;
  f.nu_plus_hz = e_plus - e_zero;
  f.nu_minus_hz = e_zero - e_minus;
  f.splitting_hz = std::abs(f.nu_plus_hz - f.nu_minus_hz);
  f.ordering = (f.nu_plus_hz > f.nu_minus_hz) - (f.nu_plus_hz < f.nu_minus_hz);
  return f;
}

EigenFrequencies exact_eigenfrequencies(const SimParams& p) {
  static const OperatorSet ops = make_operator_set();
  return exact_eigenfrequencies(p, ops);
}

double magic_angle() { return rad2deg(std::atan(std::sqrt(2.0))); }

const char* to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::power:
      return "power";
    case SweepVariable::detuning:
      return "detuning";
    case SweepVariable::theta:
      return "theta";
  }
  return "?";
}

SweepVariable sweep_variable_from_string(const std::string& s) {
  if (s == "power") return SweepVariable::power;
  if (s == "detuning") return SweepVariable::detuning;
  if (s == "theta") return SweepVariable::theta;
  throw DomainError("unknown sweep variable '" + s + "' (expected power, detuning or theta)");
}

SimParams apply_sweep_value(SimParams p, SweepVariable var, double value) {
  switch (var) {
    case SweepVariable::power:
      p.power_mw = value;
      p.rabi_hz = power_to_rabi(value);
      break;
    case SweepVariable::detuning:
      p.detuning_hz = value;
      break;
    case SweepVariable::theta:
      p.theta_deg = value;
      break;
  }
  return p;
}

SweepResult splitting_vs(SweepVariable var, const SimParams& p, const std::vector<double>& grid) {
  if (grid.empty()) throw DomainError("splitting_vs: sweep grid is empty");
  const OperatorSet ops = make_operator_set();
  SweepResult out;
  out.variable = var;
  out.points.reserve(grid.size());
  for (double v : grid) {
    const SimParams q = apply_sweep_value(p, var, v);
    q.validate();
    out.points.push_back({v, exact_eigenfrequencies(q, ops)});
  }

  if (var != SweepVariable::theta && grid.size() >= 3) {
    std::vector<double> x, y;
    for (const auto& pt : out.points) {
      x.push_back(pt.parameter);
      y.push_back(pt.freqs.splitting_hz);
    }
    out.trend = fit_trend(x, y, var == SweepVariable::power ? TrendLaw::linear : TrendLaw::hyperbolic);
  }
  return out;
}

std::optional<double> signed_splitting_zero(const SweepResult& sweep) {
  for (std::size_t k = 1; k < sweep.points.size(); ++k) {
    const double y0 = sweep.points[k - 1].freqs.signed_splitting_hz();
    const double y1 = sweep.points[k].freqs.signed_splitting_hz();
    const double x0 = sweep.points[k - 1].parameter;
    const double x1 = sweep.points[k].parameter;
    if (y0 == 0.0) return x0;
    if ((y0 < 0.0) != (y1 < 0.0) || y1 == 0.0) {
      return x0 + (x1 - x0) * y0 / (y0 - y1);
    }
  }
  return std::nullopt;
}

}  // namespace sns
