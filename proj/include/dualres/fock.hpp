#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace dualres {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

/// Tensor-product Fock space described by per-mode truncation dimensions.
///
/// Basis ordering is row-major over modes: mode 0 is the most significant
/// digit, so a product state (n0, n1, ..., nk) has index
/// ((n0 * d1 + n1) * d2 + ...) * dk + nk. Operators embedded on mode m are
/// I(d0) x ... x O(dm) x ... x I(dk).
class HilbertSpace {
 public:
  static constexpr std::size_t kDefaultDimensionCap = 4096;

  explicit HilbertSpace(std::vector<int> dims,
                        std::size_t dimension_cap = kDefaultDimensionCap);

  const std::vector<int>& dims() const { return dims_; }
  int mode_count() const { return static_cast<int>(dims_.size()); }
  Eigen::Index dimension() const { return dimension_; }

  /// Distance in basis index between neighbouring occupations of `mode`.
  Eigen::Index stride(int mode) const;

  Eigen::Index index_of(std::span<const int> occupations) const;
  std::vector<int> occupations_of(Eigen::Index index) const;
  int occupation(Eigen::Index index, int mode) const;

  bool operator==(const HilbertSpace& other) const { return dims_ == other.dims_; }

 private:
  std::vector<int> dims_;
  Eigen::Index dimension_ = 1;
};

/// Dense operator on a HilbertSpace.
class OperatorMatrix {
 public:
  OperatorMatrix(HilbertSpace space, ComplexMatrix elements);

  const HilbertSpace& space() const { return space_; }
  const ComplexMatrix& elements() const { return elements_; }

  /// max_ij |M_ij - conj(M_ji)|
  double hermitian_defect() const;

  OperatorMatrix adjoint() const;

  OperatorMatrix& operator+=(const OperatorMatrix& rhs);
  OperatorMatrix& operator-=(const OperatorMatrix& rhs);
  OperatorMatrix& operator*=(Complex scale);

  friend OperatorMatrix operator+(OperatorMatrix lhs, const OperatorMatrix& rhs) { return lhs += rhs; }
  friend OperatorMatrix operator-(OperatorMatrix lhs, const OperatorMatrix& rhs) { return lhs -= rhs; }
  friend OperatorMatrix operator*(OperatorMatrix lhs, Complex scale) { return lhs *= scale; }
  friend OperatorMatrix operator*(Complex scale, OperatorMatrix rhs) { return rhs *= scale; }
  friend OperatorMatrix operator*(const OperatorMatrix& lhs, const OperatorMatrix& rhs);

 private:
  void check_compatible(const OperatorMatrix& other) const;

  HilbertSpace space_;
  ComplexMatrix elements_;
};

OperatorMatrix identity_operator(const HilbertSpace& space);

/// Embeds a single-mode operator (dims[mode] x dims[mode]) into the full space.
OperatorMatrix embed_operator(const HilbertSpace& space, int mode, const ComplexMatrix& single_mode);

/// Truncated annihilation operator: sqrt(n) on the first superdiagonal.
ComplexMatrix single_mode_lowering(int dim);

OperatorMatrix lowering_operator(const HilbertSpace& space, int mode);
OperatorMatrix raising_operator(const HilbertSpace& space, int mode);
OperatorMatrix number_operator(const HilbertSpace& space, int mode);

struct Eigensystem {
  Eigen::VectorXd values;  // ascending
  ComplexMatrix vectors;   // column k belongs to values[k]
};

/// Hermitian eigendecomposition. Rejects inputs whose hermitian_defect()
/// exceeds `hermitian_tolerance`, reporting the measured asymmetry.
Eigensystem eigendecompose_hermitian(const OperatorMatrix& op, double hermitian_tolerance = 1e-10);
Eigensystem eigendecompose_hermitian(const ComplexMatrix& matrix, double hermitian_tolerance = 1e-10);

}  // namespace dualres
