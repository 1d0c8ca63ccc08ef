#pragma once

#include <vector>

#include "sns/hamiltonian.hpp"
#include "sns/operators.hpp"
#include "sns/types.hpp"

namespace sns {

/// 4x4 density matrix over (|+1>_x, |0>_x, |-1>_x, |e>).
using DensityMatrix = Mat4;

/// Throws DomainError unless rho is Hermitian and unit-trace within `tol`
/// and its smallest eigenvalue is >= -1e-8.
void check_density(const DensityMatrix& rho, double tol = 1e-10);

/// Column-stacking vectorization: vec(A X B) = (B^T kron A) vec(X).
Vec16 vec(const Mat4& m);
Mat4 unvec(const Vec16& v);

/// Unpolarized ground state (1/3) sum_m |m><m|, the state of entering atoms.
DensityMatrix transit_reference();

/// Affine generator d vec(rho)/dt = generator * vec(rho) + source, in rad/s.
struct Liouvillian {
  Mat16 generator = Mat16::Zero();
  Vec16 source = Vec16::Zero();
  double transit_rate = 0.0;  // gamma_t in rad/s, 0 when the transit term is absent
};

enum class TransitTerm {
  affine,  // include gamma_t (rho0 - rho)
  none,    // coherent evolution and spontaneous emission only
};

/// -i[H, rho] + sum_k (Gamma/3) D[|m>_x<e|] rho + gamma_t (rho0 - rho).
Liouvillian build_liouvillian(const SimParams& p, const OperatorSet& ops,
                              TransitTerm transit = TransitTerm::affine);
Liouvillian build_liouvillian(const SimParams& p);

/// Superoperator matrix of X -> c X c^dagger - {c^dagger c, X}/2.
Mat16 dissipator(const Mat4& c);

/// Superoperator matrix of X -> -i[H, X].
Mat16 commutator_superop(const Mat4& h);

/// Eigenvalues of the generator (rad/s).
Eigen::Matrix<cplx, 16, 1> liouvillian_spectrum(const Liouvillian& l);

/// Fixed point of the affine dynamics. Throws SingularError when the
/// generator has an eigenvalue within 1e-6 * gamma_t of zero (or when it was
/// built without the transit term).
DensityMatrix steady_state(const Liouvillian& l);

/// Fixed-step RK4 integration of the affine ODE. Returns n_steps + 1 states
/// starting with rho. Throws StepSizeError when dt exceeds 0.05 / max|eig|.
std::vector<DensityMatrix> propagate(const DensityMatrix& rho, const Liouvillian& l, double dt,
                                     std::size_t n_steps);

/// Exact evolution over time t through the matrix exponential of the
/// augmented (17x17) affine generator.
DensityMatrix evolve_exact(const DensityMatrix& rho, const Liouvillian& l, double t);

/// exp(generator * t), the homogeneous propagator.
Mat16 propagator(const Liouvillian& l, double t);

}  // namespace sns
