#include "sns/operators.hpp"

#include <cmath>

namespace sns {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

// Cartesian vectors of |+1>_z, |0>_z, |-1>_z (Condon-Shortley), one per row.
Eigen::Matrix3cd cartesian_kets() {
  const cplx i(0.0, 1.0);
  Eigen::Matrix3cd c;
  c.row(0) << -kInvSqrt2, -i * kInvSqrt2, 0.0;
  c.row(1) << 0.0, 0.0, 1.0;
  c.row(2) << kInvSqrt2, -i * kInvSqrt2, 0.0;
  return c;
}

}  // namespace

OperatorSet spin1_matrices() {
  const cplx i(0.0, 1.0);
  OperatorSet ops;
  ops.jx << 0.0, kInvSqrt2, 0.0,
            kInvSqrt2, 0.0, kInvSqrt2,
            0.0, kInvSqrt2, 0.0;
  ops.jy << 0.0, -i * kInvSqrt2, 0.0,
            i * kInvSqrt2, 0.0, -i * kInvSqrt2,
            0.0, i * kInvSqrt2, 0.0;
  ops.jz = Mat3::Zero();
  ops.jz(0, 0) = 1.0;
  ops.jz(2, 2) = -1.0;
  ops.rot_z_to_x = Mat3::Identity();
  ops.v_pi.setZero();
  ops.v_sigma_plus.setZero();
  ops.v_sigma_minus.setZero();
  return ops;
}

Mat3 basis_rotation_z_to_x(const std::array<double, 3>& ket_phases) {
  Mat3 u;
  // columns: |+1>_x, |0>_x, |-1>_x
  u << 0.5, kInvSqrt2, 0.5,
       kInvSqrt2, 0.0, -kInvSqrt2,
       0.5, -kInvSqrt2, 0.5;
  for (int m = 0; m < 3; ++m) {
    u.col(m) *= std::polar(1.0, ket_phases[static_cast<std::size_t>(m)]);
  }
  return u;
}

Row3 dipole_row(const Eigen::Vector3cd& eps, const OperatorSet& ops) {
  // <e|d_i|j> = delta_ij / sqrt(3) for a J=1 -> J'=0 transition
  const Eigen::Matrix<cplx, 1, 3> amp_z = (cartesian_kets() * eps).transpose() / std::sqrt(3.0);
  return amp_z * ops.rot_z_to_x;
}

OperatorSet make_operator_set(const std::array<double, 3>& ket_phases) {
  OperatorSet ops = spin1_matrices();
  ops.rot_z_to_x = basis_rotation_z_to_x(ket_phases);

  const cplx i(0.0, 1.0);
  // Spherical unit vectors about x with transverse pair (y, z).
  const Eigen::Vector3cd e_pi(1.0, 0.0, 0.0);
  const Eigen::Vector3cd e_plus = -kInvSqrt2 * Eigen::Vector3cd(0.0, 1.0, i);
  const Eigen::Vector3cd e_minus = kInvSqrt2 * Eigen::Vector3cd(0.0, 1.0, -i);
  ops.v_pi = dipole_row(e_pi, ops);
  ops.v_sigma_plus = dipole_row(e_plus, ops);
  ops.v_sigma_minus = dipole_row(e_minus, ops);
  return ops;
}

Row3 coupling_operator(double theta_deg, const OperatorSet& ops) {
  if (!(theta_deg >= 0.0 && theta_deg <= 360.0)) {
    throw DomainError("coupling_operator: theta must lie in [0, 360] degrees, got " +
                      std::to_string(theta_deg));
  }
  const double th = deg2rad(theta_deg);
  // y = (e_minus - e_plus) / sqrt(2)
  return std::cos(th) * ops.v_pi + std::sin(th) * kInvSqrt2 * (ops.v_sigma_minus - ops.v_sigma_plus);
}

Mat3 axis_projector(const Eigen::Vector3d& n, int m, const OperatorSet& ops) {
  if (m < -1 || m > 1) throw DomainError("axis_projector: m must be -1, 0 or +1");
  const Eigen::Vector3d u = n.normalized();
  const Mat3 jn = u.x() * ops.jx + u.y() * ops.jy + u.z() * ops.jz;
  const Mat3 id = Mat3::Identity();
  switch (m) {
    case 1:
      return 0.5 * jn * (jn + id);
    case 0:
      return id - jn * jn;
    default:
      return 0.5 * jn * (jn - id);
  }
}

Mat4 embed_ground(const Mat3& op) {
  Mat4 out = Mat4::Zero();
  out.topLeftCorner<3, 3>() = op;
  return out;
}

}  // namespace sns
