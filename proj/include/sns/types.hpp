#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sns {

using cplx = std::complex<double>;

using Mat3 = Eigen::Matrix<cplx, 3, 3>;
using Mat4 = Eigen::Matrix<cplx, 4, 4>;
using Mat16 = Eigen::Matrix<cplx, 16, 16>;
using Vec16 = Eigen::Matrix<cplx, 16, 1>;
using Row3 = Eigen::Matrix<cplx, 1, 3>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

// Basis order used by every 4x4 object: |+1>_x, |0>_x, |-1>_x, |e>.
inline constexpr int kPlus = 0;
inline constexpr int kZero = 1;
inline constexpr int kMinus = 2;
inline constexpr int kExcited = 3;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the physical or numerical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Dressed states cannot be matched to bare sublevels unambiguously.
class TrackingError : public Error {
 public:
  using Error::Error;
};

class StepSizeError : public Error {
 public:
  using Error::Error;
};

class SingularError : public Error {
 public:
  using Error::Error;
};

class NoPeakError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

}  // namespace sns
