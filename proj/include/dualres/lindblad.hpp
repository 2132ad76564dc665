#pragma once

#include <vector>

#include <Eigen/Sparse>

#include "dualres/fock.hpp"

namespace dualres {

/// Propagator for one piecewise-constant stage of the master equation
///   d rho/dt = -i[H, rho] + sum_k (L_k rho L_k^dag - 1/2 {L_k^dag L_k, rho}).
///
/// Each step of size h is a symmetric (Strang) composition: half a step of
/// the exact unitary exp(-iHh/2) from the eigendecomposition of H, a full
/// classical RK4 step of the dissipator alone, and another exact half step.
/// Consecutive half steps are merged. The scheme is second order in h and
/// preserves trace to rounding. With no collapse operators the evolution is
/// the exact unitary in one shot.
///
/// Matrices are in the bare basis. H in rad/ns, collapse operators in ns^-1/2.
class StagePropagator {
 public:
  StagePropagator(const OperatorMatrix& hamiltonian, const std::vector<OperatorMatrix>& collapse,
                  double max_step_ns);

  /// rho(t) -> rho(t + duration)
  void advance(ComplexMatrix& rho, double duration_ns) const;

  /// Heisenberg-picture adjoint: O -> Phi_duration^dag(O), so that
  /// tr(O advance(rho)) == tr(advance_adjoint(O) rho) up to rounding.
  void advance_adjoint(ComplexMatrix& observable, double duration_ns) const;

  bool unitary() const { return !any_collapse_; }
  const Eigen::VectorXd& energies() const { return energies_; }
  const ComplexMatrix& eigenvectors() const { return vectors_; }

 private:
  using Sparse = Eigen::SparseMatrix<Complex>;

  ComplexMatrix unitary_for(double t) const;
  ComplexMatrix dissipator(const ComplexMatrix& rho) const;
  ComplexMatrix dissipator_adjoint(const ComplexMatrix& observable) const;
  template <typename F>
  void rk4(ComplexMatrix& x, double h, const F& rhs) const;
  template <typename D>
  void strang(ComplexMatrix& x, double duration_ns, bool adjoint, const D& rhs) const;

  Eigen::VectorXd energies_;
  ComplexMatrix vectors_;
  // Diagonal collapse operators and a diagonal K fold into one elementwise
  // weight: D(rho) = W o rho + sum over the remaining L of L rho L^dag.
  // at most one nonzero per column (ladder operators): column j maps to row[j]
  struct Monomial {
    std::vector<Eigen::Index> row;  // -1 for an empty column
    std::vector<Complex> value;
  };
  std::vector<Monomial> monomial_;
  std::vector<Sparse> collapse_;          // everything else
  std::vector<Sparse> collapse_adjoint_;
  Sparse decay_;                          // sum_k L_k^dag L_k when not diagonal
  bool decay_diagonal_ = true;
  ComplexMatrix weight_;
  bool any_collapse_ = false;
  double max_step_ = 0.25;
};

}  // namespace dualres
