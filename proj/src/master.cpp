#include "sns/master.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace sns {

void check_density(const DensityMatrix& rho, double tol) {
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm > tol) {
    throw DomainError("density matrix is not Hermitian (deviation " + std::to_string(herm) + ")");
  }
  const double tr_err = std::abs(rho.trace() - cplx(1.0, 0.0));
  if (tr_err > tol) {
    throw DomainError("density matrix trace differs from 1 by " + std::to_string(tr_err));
  }
  const Mat4 h = 0.5 * (rho + rho.adjoint());
  const double min_eig = Eigen::SelfAdjointEigenSolver<Mat4>(h, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  if (min_eig < -1e-8) {
    throw DomainError("density matrix has negative eigenvalue " + std::to_string(min_eig));
  }
}

Vec16 vec(const Mat4& m) { return Eigen::Map<const Vec16>(m.data()); }

Mat4 unvec(const Vec16& v) { return Eigen::Map<const Mat4>(v.data()); }

DensityMatrix transit_reference() {
  DensityMatrix rho = DensityMatrix::Zero();
  for (int m = 0; m < 3; ++m) rho(m, m) = 1.0 / 3.0;
  return rho;
}

Mat16 commutator_superop(const Mat4& h) {
  const Mat4 id = Mat4::Identity();
  const cplx i(0.0, 1.0);
  return -i * (Mat16(Eigen::kroneckerProduct(id, h)) - Mat16(Eigen::kroneckerProduct(h.transpose(), id)));
}

Mat16 dissipator(const Mat4& c) {
  const Mat4 id = Mat4::Identity();
  const Mat4 cdc = c.adjoint() * c;
  return Mat16(Eigen::kroneckerProduct(c.conjugate(), c)) - 0.5 * Mat16(Eigen::kroneckerProduct(id, cdc)) -
         0.5 * Mat16(Eigen::kroneckerProduct(cdc.transpose(), id));
}

Liouvillian build_liouvillian(const SimParams& p, const OperatorSet& ops, TransitTerm transit) {
  Liouvillian l;
  l.generator = commutator_superop(build_hamiltonian(p, ops));

  const double branch_rate = kTwoPi * p.gamma_hz / 3.0;
  for (int m = 0; m < 3; ++m) {
    Mat4 c = Mat4::Zero();
    c(m, kExcited) = std::sqrt(branch_rate);
    l.generator += dissipator(c);
  }

  if (transit == TransitTerm::affine) {
    l.transit_rate = kTwoPi * p.transit_hz;
    l.generator -= l.transit_rate * Mat16::Identity();
    l.source = l.transit_rate * vec(transit_reference());
  }
  return l;
}

Liouvillian build_liouvillian(const SimParams& p) { return build_liouvillian(p, make_operator_set()); }

Eigen::Matrix<cplx, 16, 1> liouvillian_spectrum(const Liouvillian& l) {
  Eigen::ComplexEigenSolver<Mat16> es(l.generator, false);
  return es.eigenvalues();
}

DensityMatrix steady_state(const Liouvillian& l) {
  if (!(l.transit_rate > 0.0)) {
    throw SingularError("steady_state: generator has no transit term, fixed point is not unique");
  }
  const auto eig = liouvillian_spectrum(l);
  const double smallest = eig.cwiseAbs().minCoeff();
  if (smallest < 1e-6 * l.transit_rate) {
    std::ostringstream os;
    os << "steady_state: generator is (nearly) singular, smallest |eigenvalue| = " << smallest
       << " rad/s vs gamma_t = " << l.transit_rate << " rad/s; eigenvalues:\n"
       << eig.transpose();
    throw SingularError(os.str());
  }
  const Vec16 x = l.generator.partialPivLu().solve(-l.source);
  DensityMatrix rho = unvec(x);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return rho;
}

std::vector<DensityMatrix> propagate(const DensityMatrix& rho, const Liouvillian& l, double dt,
                                     std::size_t n_steps) {
  if (!(dt > 0.0)) throw StepSizeError("propagate: dt must be positive");
  const auto eig = liouvillian_spectrum(l);
  Eigen::Index arg = 0;
  const double fastest = eig.cwiseAbs().maxCoeff(&arg);
  if (fastest > 0.0 && dt > 0.05 / fastest) {
    std::ostringstream os;
    os << "propagate: dt = " << dt << " s exceeds the stability bound 0.05/|lambda| = " << 0.05 / fastest
       << " s set by the generator eigenvalue " << eig(arg) << " rad/s (" << fastest / kTwoPi << " Hz)";
    throw StepSizeError(os.str());
  }

  std::vector<DensityMatrix> out;
  out.reserve(n_steps + 1);
  out.push_back(rho);
  Vec16 v = vec(rho);
  const Mat16& a = l.generator;
  const Vec16& s = l.source;
  for (std::size_t n = 0; n < n_steps; ++n) {
    const Vec16 k1 = a * v + s;
    const Vec16 k2 = a * (v + 0.5 * dt * k1) + s;
    const Vec16 k3 = a * (v + 0.5 * dt * k2) + s;
    const Vec16 k4 = a * (v + dt * k3) + s;
    v += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.push_back(unvec(v));
  }
  return out;
}

Mat16 propagator(const Liouvillian& l, double t) { return Mat16((l.generator * t).exp()); }

DensityMatrix evolve_exact(const DensityMatrix& rho, const Liouvillian& l, double t) {
  using Mat17 = Eigen::Matrix<cplx, 17, 17>;
  Mat17 aug = Mat17::Zero();
  aug.topLeftCorner<16, 16>() = l.generator * t;
  aug.topRightCorner<16, 1>() = l.source * t;
  const Mat17 e = aug.exp();
  const Vec16 v = e.topLeftCorner<16, 16>() * vec(rho) + e.topRightCorner<16, 1>();
  return unvec(v);
}

}  // namespace sns
