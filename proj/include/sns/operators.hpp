#pragma once

#include <array>

#include "sns/types.hpp"

namespace sns {

/// Spin-1 ground manifold algebra plus the J=1 -> J'=0 dipole couplings.
///
/// jx, jy, jz are expressed in the z-quantized basis {|+1>_z, |0>_z, |-1>_z}.
/// Columns of rot_z_to_x are the x-quantized kets |m>_x written in that basis,
/// ordered (+1, 0, -1). The coupling blocks are rows <e| eps.d |m>_x for unit
/// polarizations pi (along x) and sigma+/- (circular about x), each carrying
/// the 1/sqrt(3) Clebsch-Gordan amplitude.
struct OperatorSet {
  Mat3 jx;
  Mat3 jy;
  Mat3 jz;
  Mat3 rot_z_to_x;
  Row3 v_pi;
  Row3 v_sigma_plus;
  Row3 v_sigma_minus;

  /// Matrix of a z-basis operator in the x-quantized basis.
  Mat3 to_x(const Mat3& op_z) const { return rot_z_to_x.adjoint() * op_z * rot_z_to_x; }
};

/// Standard spin-1 matrices (units of hbar); only jx, jy, jz are filled.
OperatorSet spin1_matrices();

/// Eigenbasis of jx with phases fixed so that U^dagger jz U equals the
/// standard jx matrix. `ket_phases` (radians) multiplies column m by
/// exp(i*phase); nonzero values select an alternative phase convention.
Mat3 basis_rotation_z_to_x(const std::array<double, 3>& ket_phases = {0.0, 0.0, 0.0});

/// Full operator set. Coupling blocks are derived from the basis rotation, so
/// an alternative `ket_phases` propagates consistently into them.
OperatorSet make_operator_set(const std::array<double, 3>& ket_phases = {0.0, 0.0, 0.0});

/// <e| eps.d |m>_x for an arbitrary complex polarization vector eps given in
/// lab Cartesian components (x = field axis, z = propagation axis).
Row3 dipole_row(const Eigen::Vector3cd& eps, const OperatorSet& ops);

/// Coupling row for linear polarization at `theta_deg` from the field axis,
/// in units of the total Rabi frequency. Requires 0 <= theta_deg <= 360.
Row3 coupling_operator(double theta_deg, const OperatorSet& ops);

/// Spin-1 eigenprojector of n.J (z basis) for eigenvalue m in {-1, 0, +1}.
Mat3 axis_projector(const Eigen::Vector3d& n, int m, const OperatorSet& ops);

/// Extend a ground-manifold operator by a zero excited row and column.
Mat4 embed_ground(const Mat3& op);

}  // namespace sns
