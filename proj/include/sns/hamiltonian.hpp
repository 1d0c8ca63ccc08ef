#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sns/operators.hpp"
#include "sns/types.hpp"

namespace sns {

/// Uniform frequency grid, inclusive of both ends.
struct FreqGrid {
  double min_hz = 2.0e6;
  double max_hz = 4.2e6;
  std::size_t points = 1101;

  std::vector<double> values() const;
};

/// Physical and numerical knobs. All frequencies are linear (Hz); matrix
/// builders convert to rad/s.
struct SimParams {
  double rabi_hz = 40.0e6;       // Omega / 2pi
  double detuning_hz = 1.5e9;    // Delta / 2pi, blue positive
  double theta_deg = 0.0;        // polarization angle from the field axis
  double larmor_hz = 3.1e6;
  double gamma_hz = 1.6e6;       // excited-state decay Gamma / 2pi
  double transit_hz = 40.0e3;    // gamma_t / 2pi
  std::optional<double> power_mw;

  std::uint64_t rng_seed = 1;
  double time_step_s = 62.5e-9;  // signal sampling interval of the stochastic route
  double duration_s = 4.0e-3;    // per trajectory
  std::size_t n_trajectories = 32;
  double n_eff = 100.0;          // atom-equivalents in the probe volume
  FreqGrid freq_grid;

  /// Throws DomainError on unphysical values.
  void validate() const;
};

/// Scale of the power -> Rabi map: Omega/2pi at 1 mW.
inline constexpr double kRabiHzAtOneMilliwatt = 40.0e6;

/// Omega/2pi = scale * sqrt(P / 1 mW).
double power_to_rabi(double power_mw, double scale_hz = kRabiHzAtOneMilliwatt);

/// Returns the params with rabi_hz recomputed from power_mw when that is set.
SimParams resolve_power(SimParams p, double scale_hz = kRabiHzAtOneMilliwatt);

/// True when |Delta| >= 10 max(Omega, Gamma/2); outside this the secular
/// light-shift formula is only indicative.
bool perturbative_regime(const SimParams& p);

/// Human-readable warning, empty when inside the perturbative regime.
std::string regime_warning(const SimParams& p);

/// Rotating-frame Hamiltonian in rad/s over (|+1>_x, |0>_x, |-1>_x, |e>).
Mat4 build_hamiltonian(const SimParams& p, const OperatorSet& ops);

}  // namespace sns
