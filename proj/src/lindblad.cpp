#include "dualres/lindblad.hpp"

#include <cmath>

#include <fmt/format.h>

#include "dualres/errors.hpp"

namespace dualres {
namespace {

Eigen::SparseMatrix<Complex> to_sparse(const ComplexMatrix& m) {
  return m.sparseView(Complex(0.0, 0.0), 0.0);
}

bool one_per_column(const ComplexMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    int count = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) count += m(i, j) != Complex(0.0, 0.0);
    if (count > 1) return false;
  }
  return true;
}

bool is_diagonal(const ComplexMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (i != j && m(i, j) != Complex(0.0, 0.0)) return false;
    }
  }
  return true;
}

}  // namespace

StagePropagator::StagePropagator(const OperatorMatrix& hamiltonian, const std::vector<OperatorMatrix>& collapse,
                                 double max_step_ns)
    : max_step_(max_step_ns) {
  if (!(max_step_ns > 0.0) || !std::isfinite(max_step_ns)) {
    throw ConfigError(fmt::format("integrator step {} ns must be positive", max_step_ns));
  }
  auto eig = eigendecompose_hermitian(hamiltonian, 1e-9);
  energies_ = std::move(eig.values);
  vectors_ = std::move(eig.vectors);

  const Eigen::Index n = hamiltonian.space().dimension();
  ComplexMatrix decay = ComplexMatrix::Zero(n, n);
  weight_ = ComplexMatrix::Zero(n, n);
  for (const auto& op : collapse) {
    if (!(op.space() == hamiltonian.space())) {
      throw ConfigError("collapse operator lives on a different space than the Hamiltonian");
    }
    const ComplexMatrix& l = op.elements();
    decay += l.adjoint() * l;
    any_collapse_ = true;
    if (is_diagonal(l)) {
      const Eigen::VectorXcd d = l.diagonal();
      weight_ += d * d.adjoint();
    } else if (one_per_column(l)) {
      Monomial m;
      m.row.assign(static_cast<std::size_t>(n), -1);
      m.value.assign(static_cast<std::size_t>(n), Complex(0.0, 0.0));
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
          if (l(i, j) != Complex(0.0, 0.0)) m.row[j] = i, m.value[j] = l(i, j);
        }
      }
      monomial_.push_back(std::move(m));
    } else {
      collapse_.push_back(to_sparse(l));
      collapse_adjoint_.push_back(to_sparse(l.adjoint()));
    }
  }
  decay_diagonal_ = is_diagonal(decay);
  if (decay_diagonal_) {
    const Eigen::VectorXd k = decay.diagonal().real();
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) weight_(i, j) -= 0.5 * (k[i] + k[j]);
    }
  } else {
    decay_ = to_sparse(decay);
  }
}

ComplexMatrix StagePropagator::unitary_for(double t) const {
  const Eigen::VectorXcd phases =
      (energies_ * t).unaryExpr([](double x) { return std::polar(1.0, -x); });
  return vectors_ * phases.asDiagonal() * vectors_.adjoint();
}

// sum_k L rho L^dag - 1/2 (K rho + rho K); written without assuming rho is Hermitian.
ComplexMatrix StagePropagator::dissipator(const ComplexMatrix& rho) const {
  ComplexMatrix out = weight_.cwiseProduct(rho);
  if (!decay_diagonal_) {
    const ComplexMatrix k_rho_dag = decay_ * rho.adjoint();
    out -= 0.5 * (decay_ * rho + k_rho_dag.adjoint());
  }
  const Eigen::Index n = rho.rows();
  for (const auto& m : monomial_) {
    // (L rho L^dag)(r_i, r_j) += v_i rho(i, j) conj(v_j)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (m.row[j] < 0) continue;
      const Complex vj = std::conj(m.value[j]);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (m.row[i] < 0) continue;
        out(m.row[i], m.row[j]) += m.value[i] * rho(i, j) * vj;
      }
    }
  }
  if (collapse_.empty()) return out;
  const ComplexMatrix rho_dag = rho.adjoint();
  for (const auto& l : collapse_) {
    const ComplexMatrix l_rho_dag = l * rho_dag;  // L rho^dag
    out += l * l_rho_dag.adjoint();               // L rho L^dag
  }
  return out;
}

// sum_k L^dag O L - 1/2 (K O + O K)
ComplexMatrix StagePropagator::dissipator_adjoint(const ComplexMatrix& observable) const {
  // the diagonal part is W* o O
  ComplexMatrix out = weight_.conjugate().cwiseProduct(observable);
  if (!decay_diagonal_) {
    const ComplexMatrix k_o_dag = decay_ * observable.adjoint();
    out -= 0.5 * (decay_ * observable + k_o_dag.adjoint());
  }
  const Eigen::Index n = observable.rows();
  for (const auto& m : monomial_) {
    // (L^dag O L)(i, j) = conj(v_i) O(r_i, r_j) v_j
    for (Eigen::Index j = 0; j < n; ++j) {
      if (m.row[j] < 0) continue;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (m.row[i] < 0) continue;
        out(i, j) += std::conj(m.value[i]) * observable(m.row[i], m.row[j]) * m.value[j];
      }
    }
  }
  if (collapse_adjoint_.empty()) return out;
  const ComplexMatrix o_dag = observable.adjoint();
  for (const auto& ld : collapse_adjoint_) {
    const ComplexMatrix ld_o_dag = ld * o_dag;  // L^dag O^dag
    out += ld * ld_o_dag.adjoint();             // L^dag O L
  }
  return out;
}

template <typename F>
void StagePropagator::rk4(ComplexMatrix& x, double h, const F& rhs) const {
  const ComplexMatrix k1 = rhs(x);
  const ComplexMatrix k2 = rhs(x + (0.5 * h) * k1);
  const ComplexMatrix k3 = rhs(x + (0.5 * h) * k2);
  const ComplexMatrix k4 = rhs(x + h * k3);
  x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

template <typename D>
void StagePropagator::strang(ComplexMatrix& x, double duration_ns, bool adjoint, const D& rhs) const {
  // forward: x -> U x U^dag ; adjoint: x -> U^dag x U
  auto conjugate = [adjoint](ComplexMatrix& m, const ComplexMatrix& u) {
    if (adjoint) {
      m = u.adjoint() * m * u;
    } else {
      m = u * m * u.adjoint();
    }
  };
  if (!any_collapse_) {
    conjugate(x, unitary_for(duration_ns));
    return;
  }
  const long steps = std::max(1L, static_cast<long>(std::ceil(duration_ns / max_step_ - 1e-9)));
  const double h = duration_ns / static_cast<double>(steps);
  const ComplexMatrix half = unitary_for(0.5 * h);
  const ComplexMatrix full = unitary_for(h);
  // The adjoint map of U_h/2 D U_h/2 ... is the same palindrome with adjoint factors,
  // so both directions share the step order.
  conjugate(x, half);
  for (long s = 0; s < steps; ++s) {
    rk4(x, h, rhs);
    conjugate(x, s + 1 == steps ? half : full);
  }
}

void StagePropagator::advance(ComplexMatrix& rho, double duration_ns) const {
  if (duration_ns < 0.0) throw ConfigError("negative propagation time");
  if (duration_ns == 0.0) return;
  strang(rho, duration_ns, false, [this](const ComplexMatrix& m) { return dissipator(m); });
}

void StagePropagator::advance_adjoint(ComplexMatrix& observable, double duration_ns) const {
  if (duration_ns < 0.0) throw ConfigError("negative propagation time");
  if (duration_ns == 0.0) return;
  strang(observable, duration_ns, true, [this](const ComplexMatrix& m) { return dissipator_adjoint(m); });
}

}  // namespace dualres
