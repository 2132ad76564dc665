#include "dualres/fock.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

#include "dualres/errors.hpp"

namespace dualres {

HilbertSpace::HilbertSpace(std::vector<int> dims, std::size_t dimension_cap) : dims_(std::move(dims)) {
  if (dims_.empty()) {
    throw ConfigError("HilbertSpace needs at least one mode");
  }
  std::size_t total = 1;
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    if (dims_[k] < 2) {
      throw ConfigError(fmt::format("mode {} has truncation dimension {}; each mode needs >= 2", k, dims_[k]));
    }
    total *= static_cast<std::size_t>(dims_[k]);
    if (total > dimension_cap) {
      throw ConfigError(fmt::format("total Hilbert-space dimension exceeds cap {}", dimension_cap));
    }
  }
  dimension_ = static_cast<Eigen::Index>(total);
}

Eigen::Index HilbertSpace::stride(int mode) const {
  if (mode < 0 || mode >= mode_count()) {
    throw ConfigError(fmt::format("mode index {} out of range [0, {})", mode, mode_count()));
  }
  Eigen::Index s = 1;
  for (int k = mode_count() - 1; k > mode; --k) s *= dims_[k];
  return s;
}

Eigen::Index HilbertSpace::index_of(std::span<const int> occupations) const {
  if (static_cast<int>(occupations.size()) != mode_count()) {
    throw ConfigError("occupation list length does not match mode count");
  }
  Eigen::Index index = 0;
  for (int k = 0; k < mode_count(); ++k) {
    if (occupations[k] < 0 || occupations[k] >= dims_[k]) {
      throw ConfigError(fmt::format("occupation {} of mode {} outside truncation {}", occupations[k], k, dims_[k]));
    }
    index = index * dims_[k] + occupations[k];
  }
  return index;
}

std::vector<int> HilbertSpace::occupations_of(Eigen::Index index) const {
  std::vector<int> occ(dims_.size());
  for (int k = mode_count() - 1; k >= 0; --k) {
    occ[k] = static_cast<int>(index % dims_[k]);
    index /= dims_[k];
  }
  return occ;
}

int HilbertSpace::occupation(Eigen::Index index, int mode) const {
  return static_cast<int>((index / stride(mode)) % dims_[mode]);
}

OperatorMatrix::OperatorMatrix(HilbertSpace space, ComplexMatrix elements)
    : space_(std::move(space)), elements_(std::move(elements)) {
  if (elements_.rows() != elements_.cols() || elements_.rows() != space_.dimension()) {
    throw ConfigError(fmt::format("operator of shape {}x{} does not match space dimension {}", elements_.rows(),
                                  elements_.cols(), space_.dimension()));
  }
}

double OperatorMatrix::hermitian_defect() const {
  return (elements_ - elements_.adjoint()).cwiseAbs().maxCoeff();
}

OperatorMatrix OperatorMatrix::adjoint() const { return OperatorMatrix(space_, elements_.adjoint()); }

void OperatorMatrix::check_compatible(const OperatorMatrix& other) const {
  if (!(space_ == other.space_)) {
    throw ConfigError("operators live on different Hilbert spaces");
  }
}

OperatorMatrix& OperatorMatrix::operator+=(const OperatorMatrix& rhs) {
  check_compatible(rhs);
  elements_ += rhs.elements_;
  return *this;
}

OperatorMatrix& OperatorMatrix::operator-=(const OperatorMatrix& rhs) {
  check_compatible(rhs);
  elements_ -= rhs.elements_;
  return *this;
}

OperatorMatrix& OperatorMatrix::operator*=(Complex scale) {
  elements_ *= scale;
  return *this;
}

OperatorMatrix operator*(const OperatorMatrix& lhs, const OperatorMatrix& rhs) {
  lhs.check_compatible(rhs);
  return OperatorMatrix(lhs.space_, lhs.elements_ * rhs.elements_);
}

OperatorMatrix identity_operator(const HilbertSpace& space) {
  return OperatorMatrix(space, ComplexMatrix::Identity(space.dimension(), space.dimension()));
}

OperatorMatrix embed_operator(const HilbertSpace& space, int mode, const ComplexMatrix& single_mode) {
  const Eigen::Index stride = space.stride(mode);
  const int d = space.dims()[mode];
  if (single_mode.rows() != d || single_mode.cols() != d) {
    throw ConfigError(fmt::format("single-mode operator must be {}x{} for mode {}", d, d, mode));
  }
  const Eigen::Index n = space.dimension();
  ComplexMatrix full = ComplexMatrix::Zero(n, n);
  for (Eigen::Index col = 0; col < n; ++col) {
    const int from = static_cast<int>((col / stride) % d);
    for (int to = 0; to < d; ++to) {
      const Complex value = single_mode(to, from);
      if (value != Complex(0.0, 0.0)) {
        full(col + (to - from) * stride, col) = value;
      }
    }
  }
  return OperatorMatrix(space, std::move(full));
}

ComplexMatrix single_mode_lowering(int dim) {
  ComplexMatrix a = ComplexMatrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

OperatorMatrix lowering_operator(const HilbertSpace& space, int mode) {
  space.stride(mode);  // range check before touching dims()
  return embed_operator(space, mode, single_mode_lowering(space.dims()[mode]));
}

OperatorMatrix raising_operator(const HilbertSpace& space, int mode) {
  space.stride(mode);
  return embed_operator(space, mode, single_mode_lowering(space.dims()[mode]).adjoint());
}

OperatorMatrix number_operator(const HilbertSpace& space, int mode) {
  space.stride(mode);
  const int d = space.dims()[mode];
  ComplexMatrix n = ComplexMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
  return embed_operator(space, mode, n);
}

Eigensystem eigendecompose_hermitian(const ComplexMatrix& matrix, double hermitian_tolerance) {
  if (matrix.rows() != matrix.cols()) {
    throw ConfigError("eigendecomposition needs a square matrix");
  }
  const double defect = matrix.size() == 0 ? 0.0 : (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
  if (!(defect <= hermitian_tolerance)) {
    throw NumericalError(fmt::format("matrix is not Hermitian: max |M - M^dagger| = {:.3e} (tolerance {:.1e})",
                                     defect, hermitian_tolerance));
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(matrix, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("Hermitian eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Eigensystem eigendecompose_hermitian(const OperatorMatrix& op, double hermitian_tolerance) {
  return eigendecompose_hermitian(op.elements(), hermitian_tolerance);
}

}  // namespace dualres
