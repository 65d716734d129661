// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace prext {

using cplx = std::complex<double>;

// Dense row-major complex matrix.  Sized for desk-scale states
// (dimension at most a few thousand); all arithmetic is plain loops so
// results are bit-reproducible across platforms with IEEE doubles.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), a_(rows * cols, cplx(0.0, 0.0)) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  const cplx& operator()(std::size_t i, std::size_t j) const {
    return a_[i * cols_ + j];
  }
  cplx& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }

  Matrix operator+(const Matrix& o) const;
  Matrix operator-(const Matrix& o) const;
  Matrix operator*(const Matrix& o) const;
  Matrix operator*(cplx s) const;

  Matrix adjoint() const;
  cplx trace() const;
  double max_abs() const;
  double frobenius() const;
  bool finite() const;

  // max_ij |A(i,j) - A(j,i)^*|
  double hermiticity_defect() const;

  static Matrix kron(const Matrix& a, const Matrix& b);
  static Matrix outer(const std::vector<cplx>& u, const std::vector<cplx>& v);

  std::vector<cplx> apply(const std::vector<cplx>& v) const;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> a_;
};

struct EigenSystem {
  std::vector<double> values;  // descending
  Matrix vectors;              // column k pairs with values[k]
};

// Cyclic-Jacobi eigendecomposition of a Hermitian matrix.
EigenSystem hermitian_eigen(const Matrix& h);

// Eigenvalues only (same routine, vectors discarded).
std::vector<double> hermitian_eigenvalues(const Matrix& h);

struct Svd {
  std::vector<double> singular;  // descending
  Matrix u;                      // rows x rank-completed square
  Matrix v;                      // cols x cols, A = U diag(s) V^dagger
};

// SVD through the Hermitian eigenproblem of A^dagger A; adequate at
// these dimensions and free of external dependencies.
Svd svd(const Matrix& a);

double trace_norm_matrix(const Matrix& a);

// Square root of a PSD Hermitian matrix via its eigensystem; negative
// eigenvalues within `clamp` of zero are treated as zero.
Matrix psd_sqrt(const Matrix& h, double clamp = 1e-9);

// Extends the given orthonormal columns to a full orthonormal basis by
// Gram-Schmidt over the canonical basis (deterministic).
Matrix complete_orthonormal(const Matrix& columns, std::size_t dim);

}  // namespace prext
