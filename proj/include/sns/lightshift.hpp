#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sns/hamiltonian.hpp"
#include "sns/operators.hpp"
#include "sns/trend.hpp"

namespace sns {

/// Light shifts of the x-quantized ground sublevels, Hz.
struct LightShifts {
  double delta_minus1_hz = 0.0;
  double delta_0_hz = 0.0;
  double delta_plus1_hz = 0.0;
};

/// Spin precession frequencies nu+ = (E+1 - E0)/h and nu- = (E0 - E-1)/h.
struct EigenFrequencies {
  double nu_plus_hz = 0.0;
  double nu_minus_hz = 0.0;
  double splitting_hz = 0.0;  // |nu+ - nu-|
  int ordering = 0;           // sign(nu+ - nu-)
  LightShifts shifts;         // E_m/h minus the bare Zeeman energy

  double signed_splitting_hz() const { return nu_plus_hz - nu_minus_hz; }
};

/// Secular (Raman-coherence-free) second-order shifts. Requires detuning != 0.
LightShifts perturbative_shifts(const SimParams& p);

/// Frequencies implied by a set of shifts on top of the bare Larmor ladder.
EigenFrequencies frequencies_from_shifts(double larmor_hz, const LightShifts& s);

/// Diagonalizes the full Hamiltonian and tracks the ground-like dressed
/// states by maximal-overlap assignment. Requires larmor_hz > 0.
EigenFrequencies exact_eigenfrequencies(const SimParams& p, const OperatorSet& ops);
EigenFrequencies exact_eigenfrequencies(const SimParams& p);

/// Polarization angle (degrees) at which the secular shifts of all three
/// sublevels coincide: arctan(sqrt(2)).
double magic_angle();

enum class SweepVariable { power, detuning, theta };

const char* to_string(SweepVariable v);
SweepVariable sweep_variable_from_string(const std::string& s);

struct SweepPoint {
  double parameter = 0.0;  // mW, Hz or degrees
  EigenFrequencies freqs;
};

struct SweepResult {
  SweepVariable variable = SweepVariable::power;
  std::vector<SweepPoint> points;
  std::optional<TrendFit> trend;  // linear for power, hyperbolic for detuning
};

/// Applies one sweep value to a copy of the params. Power values are mW and
/// override rabi_hz through power_to_rabi.
SimParams apply_sweep_value(SimParams p, SweepVariable var, double value);

/// Exact eigenfrequencies over the grid. Power and detuning sweeps also carry
/// a trend fit of the splitting.
SweepResult splitting_vs(SweepVariable var, const SimParams& p, const std::vector<double>& grid);

/// Linear interpolation of the sign change of nu+ - nu- along the sweep.
/// Returns nullopt when the signed splitting never changes sign.
std::optional<double> signed_splitting_zero(const SweepResult& sweep);

}  // namespace sns
