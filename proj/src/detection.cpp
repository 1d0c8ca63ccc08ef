#include "sns/detection.hpp"

#include <cmath>

namespace sns {

const char* to_string(Channel c) { return c == Channel::rotation ? "rotation" : "ellipticity"; }

Channel channel_from_string(const std::string& s) {
  if (s == "rotation") return Channel::rotation;
  if (s == "ellipticity") return Channel::ellipticity;
  throw DomainError("unknown channel '" + s + "' (expected rotation or ellipticity)");
}

Eigen::Matrix<cplx, 1, 16> Observable::row() const {
  // tr(A X) = sum_ij A_ji X_ij = vec(A^T) . vec(X)
  const Mat4 at = matrix.transpose();
  return Eigen::Map<const Eigen::Matrix<cplx, 1, 16>>(at.data());
}

Observable faraday_observable(const OperatorSet& ops, double scale) {
  return {embed_ground(ops.to_x(ops.jz)), Channel::rotation, scale};
}

Observable ellipticity_observable(double theta_deg, const OperatorSet& ops, double scale) {
  const double th = deg2rad(theta_deg);
  const double q = std::numbers::pi / 4.0;
  const Mat3 ja = std::cos(th + q) * ops.jx + std::sin(th + q) * ops.jy;
  const Mat3 jb = std::cos(th - q) * ops.jx + std::sin(th - q) * ops.jy;
  return {embed_ground(ops.to_x(ja * jb + jb * ja)), Channel::ellipticity, scale};
}

Observable make_observable(Channel c, double theta_deg, const OperatorSet& ops, double scale) {
  return c == Channel::rotation ? faraday_observable(ops, scale) : ellipticity_observable(theta_deg, ops, scale);
}

double signal(const DensityMatrix& rho, const Observable& a) {
  const cplx v = (a.matrix * rho).trace();
  if (std::abs(v.imag()) > 1e-10) {
    throw DomainError("signal: imaginary residue " + std::to_string(v.imag()) + " (non-Hermitian input?)");
  }
  return a.scale * v.real();
}

}  // namespace sns
