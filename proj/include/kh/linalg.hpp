#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "kh/error.hpp"

namespace kh::linalg {

// Relative pivot tolerance shared by the triangular solve and the DMD
// companion construction: a diagonal entry d of R is a pivot only when
// |d| > rank_tol * max|diag(R)|.
inline constexpr double kDefaultRankTol = 1e-12;

// Dense column-major matrix. Column j occupies data()[j*rows, (j+1)*rows).
template <class T>
class BasicMatrix {
public:
  BasicMatrix() = default;
  BasicMatrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static BasicMatrix identity(std::size_t n) {
    BasicMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
  const T& operator()(std::size_t i, std::size_t j) const {
    return data_[j * rows_ + i];
  }

  std::span<T> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
  std::span<const T> col(std::size_t j) const {
    return {data_.data() + j * rows_, rows_};
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  bool operator==(const BasicMatrix&) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Matrix = BasicMatrix<double>;
using ComplexMatrix = BasicMatrix<std::complex<double>>;

Matrix multiply(const Matrix& a, const Matrix& b);
// a^T * b without forming the transpose.
Matrix transpose_multiply(const Matrix& a, const Matrix& b);
ComplexMatrix multiply(const Matrix& a, const ComplexMatrix& b);
Matrix transpose(const Matrix& a);

double frobenius_norm(const Matrix& a);
double frobenius_norm(const ComplexMatrix& a);
// Largest absolute entry; 0 for an empty matrix.
double max_abs(const Matrix& a);

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Matrix vectors;              // column i pairs with values[i]
  int sweeps = 0;
};

// Cyclic Jacobi rotations. Input must be symmetric to 1e-10 relative to its
// largest entry (ContractError otherwise). Gives up with NumericalError
// after max_sweeps full sweeps. Each eigenvector is signed so that its
// largest-magnitude component is positive.
SymmetricEigen sym_eig(const Matrix& c, int max_sweeps = 100);

struct QrFactors {
  Matrix q;  // m x k, orthonormal columns
  Matrix r;  // k x k, upper triangular, non-negative diagonal
};

// Householder economy QR of an m x k matrix, m >= k.
QrFactors qr_economy(const Matrix& a);

// Solves R X = B by back-substitution. Throws SingularMatrixError naming the
// first row whose pivot fails the relative rank test.
Matrix tri_solve(const Matrix& r, const Matrix& b,
                 double rank_tol = kDefaultRankTol);

// Orthogonal (Householder) reduction to upper Hessenberg form.
Matrix hessenberg(const Matrix& a);

// Eigenvalues of an upper Hessenberg matrix by the Francis double-shift QR
// iteration. Exceptional shifts at every 10th iteration on a stuck block;
// NumericalError after kMaxQrIterations on one eigenvalue.
inline constexpr int kMaxQrIterations = 60;
std::vector<std::complex<double>> hessenberg_qr_eigenvalues(Matrix h);

struct ComplexEigenPairs {
  std::vector<std::complex<double>> values;
  ComplexMatrix vectors;  // unit 2-norm columns
};

// General real eigenproblem: balancing, Hessenberg reduction, Francis QR for
// the values, complex inverse iteration on the original matrix for the
// vectors. Values are ordered by descending modulus, then descending
// imaginary part, so conjugate pairs are adjacent with the upper half-plane
// member first. The partner of a complex eigenvalue gets the elementwise
// conjugate of its vector. Each vector is phased so its largest-magnitude
// component is real and positive.
ComplexEigenPairs nonsym_eig(const Matrix& a);

}  // namespace kh::linalg
