#pragma once

#include <string>

#include "sns/master.hpp"
#include "sns/operators.hpp"

namespace sns {

enum class Channel { rotation, ellipticity };

const char* to_string(Channel c);
Channel channel_from_string(const std::string& s);

/// Polarimetric observable: signal(rho) = scale * tr(matrix * rho).
/// The matrix is Hermitian and supported on the ground manifold.
struct Observable {
  Mat4 matrix = Mat4::Zero();
  Channel label = Channel::rotation;
  double scale = 1.0;

  /// Row r with r * vec(rho) = tr(matrix * rho) (scale not included).
  Eigen::Matrix<cplx, 1, 16> row() const;
};

/// Circular birefringence: jz (probe axis) in the x-quantized basis, so the
/// signal is the population difference of |+1>_z and |-1>_z.
Observable faraday_observable(const OperatorSet& ops, double scale = 1.0);

/// Linear birefringence: j_a j_b + j_b j_a for the transverse axes at +/-45
/// degrees from the probe polarization.
Observable ellipticity_observable(double theta_deg, const OperatorSet& ops, double scale = 1.0);

Observable make_observable(Channel c, double theta_deg, const OperatorSet& ops, double scale = 1.0);

/// scale * tr(A rho). Throws DomainError if the imaginary residue exceeds 1e-10.
double signal(const DensityMatrix& rho, const Observable& a);

}  // namespace sns
