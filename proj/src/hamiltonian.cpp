#include "sns/hamiltonian.hpp"

#include <cmath>
#include <sstream>

namespace sns {

std::vector<double> FreqGrid::values() const {
  std::vector<double> out(points);
  if (points == 1) {
    out[0] = min_hz;
    return out;
  }
  const double step = (max_hz - min_hz) / static_cast<double>(points - 1);
  for (std::size_t k = 0; k < points; ++k) out[k] = min_hz + step * static_cast<double>(k);
  return out;
}

void SimParams::validate() const {
  auto fail = [](const std::string& what) { throw DomainError("invalid parameters: " + what); };
  if (!(rabi_hz >= 0.0)) fail("rabi_hz must be >= 0");
  if (!(gamma_hz > 0.0)) fail("gamma_hz must be > 0");
  if (!(transit_hz > 0.0)) fail("transit_hz must be > 0");
  if (!(larmor_hz >= 0.0)) fail("larmor_hz must be >= 0");
  if (!std::isfinite(detuning_hz)) fail("detuning_hz must be finite");
  if (!(theta_deg >= 0.0 && theta_deg <= 360.0)) fail("theta_deg must lie in [0, 360]");
  if (power_mw && !(*power_mw >= 0.0)) fail("power_mw must be >= 0");
  if (!(time_step_s > 0.0)) fail("time_step_s must be > 0");
  if (!(duration_s > 0.0)) fail("duration_s must be > 0");
  if (!(n_eff > 0.0)) fail("n_eff must be > 0");
  if (freq_grid.points == 0) fail("frequency grid is empty");
  if (!(freq_grid.max_hz >= freq_grid.min_hz)) fail("frequency grid is reversed");
}

double power_to_rabi(double power_mw, double scale_hz) {
  if (!(power_mw >= 0.0)) {
    throw DomainError("power_to_rabi: power must be >= 0 mW, got " + std::to_string(power_mw));
  }
  return scale_hz * std::sqrt(power_mw);
}

SimParams resolve_power(SimParams p, double scale_hz) {
  if (p.power_mw) p.rabi_hz = power_to_rabi(*p.power_mw, scale_hz);
  return p;
}

bool perturbative_regime(const SimParams& p) {
  return std::abs(p.detuning_hz) >= 10.0 * std::max(p.rabi_hz, 0.5 * p.gamma_hz);
}

std::string regime_warning(const SimParams& p) {
  if (perturbative_regime(p)) return {};
  std::ostringstream os;
  os << "warning: |detuning| = " << std::abs(p.detuning_hz) << " Hz is not >> max(rabi, gamma/2) = "
     << std::max(p.rabi_hz, 0.5 * p.gamma_hz) << " Hz; secular light shifts are approximate";
  return os.str();
}

Mat4 build_hamiltonian(const SimParams& p, const OperatorSet& ops) {
  const double larmor = kTwoPi * p.larmor_hz;
  const double detuning = kTwoPi * p.detuning_hz;
  const double half_rabi = 0.5 * kTwoPi * p.rabi_hz;

  Mat4 h = Mat4::Zero();
  // Zeeman term: jx is diagonal (+1, 0, -1) in the x-quantized basis
  h(kPlus, kPlus) = larmor;
  h(kMinus, kMinus) = -larmor;
  h(kExcited, kExcited) = -detuning;

  const Row3 v = coupling_operator(p.theta_deg, ops);
  for (int m = 0; m < 3; ++m) {
    h(kExcited, m) += half_rabi * v(m);
    h(m, kExcited) += half_rabi * std::conj(v(m));
  }
  return h;
}

}  // namespace sns
