// SPDX-License-Identifier: Apache-2.0
#include "prext/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "prext/errors.hpp"

namespace prext {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::operator+(const Matrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_)
    throw std::invalid_argument("Matrix: shape mismatch in +");
  Matrix r(rows_, cols_);
  for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] + o.a_[i];
  return r;
}

Matrix Matrix::operator-(const Matrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_)
    throw std::invalid_argument("Matrix: shape mismatch in -");
  Matrix r(rows_, cols_);
  for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] - o.a_[i];
  return r;
}

Matrix Matrix::operator*(const Matrix& o) const {
  if (cols_ != o.rows_) throw std::invalid_argument("Matrix: shape mismatch in *");
  Matrix r(rows_, o.cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = 0; k < cols_; ++k) {
      const cplx aik = a_[i * cols_ + k];
      if (aik == cplx(0.0, 0.0)) continue;
      const cplx* brow = &o.a_[k * o.cols_];
      cplx* rrow = &r.a_[i * o.cols_];
      for (std::size_t j = 0; j < o.cols_; ++j) rrow[j] += aik * brow[j];
    }
  }
  return r;
}

Matrix Matrix::operator*(cplx s) const {
  Matrix r(rows_, cols_);
  for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] * s;
  return r;
}

Matrix Matrix::adjoint() const {
  Matrix r(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
  return r;
}

cplx Matrix::trace() const {
  if (!square()) throw std::invalid_argument("Matrix: trace of non-square");
  cplx t = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
  return t;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (const auto& z : a_) m = std::max(m, std::abs(z));
  return m;
}

double Matrix::frobenius() const {
  double s = 0.0;
  for (const auto& z : a_) s += std::norm(z);
  return std::sqrt(s);
}

bool Matrix::finite() const {
  for (const auto& z : a_)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

double Matrix::hermiticity_defect() const {
  if (!square()) throw std::invalid_argument("Matrix: hermiticity of non-square");
  double m = 0.0;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = i; j < cols_; ++j)
      m = std::max(m, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
  return m;
}

Matrix Matrix::kron(const Matrix& a, const Matrix& b) {
  Matrix r(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const cplx aij = a(i, j);
      if (aij == cplx(0.0, 0.0)) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          r(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return r;
}

Matrix Matrix::outer(const std::vector<cplx>& u, const std::vector<cplx>& v) {
  Matrix r(u.size(), v.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) r(i, j) = u[i] * std::conj(v[j]);
  return r;
}

std::vector<cplx> Matrix::apply(const std::vector<cplx>& v) const {
  if (v.size() != cols_) throw std::invalid_argument("Matrix: apply size mismatch");
  std::vector<cplx> r(rows_, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < rows_; ++i) {
    cplx acc = 0.0;
    const cplx* row = &a_[i * cols_];
    for (std::size_t j = 0; j < cols_; ++j) acc += row[j] * v[j];
    r[i] = acc;
  }
  return r;
}

namespace {

// One two-sided rotation zeroing H(p,q); V accumulates eigenvectors.
void jacobi_rotate(Matrix& h, Matrix* v, std::size_t p, std::size_t q) {
  const cplx hpq = h(p, q);
  const double apq = std::abs(hpq);
  if (apq == 0.0) return;
  const double app = h(p, p).real();
  const double aqq = h(q, q).real();
  const double theta = 0.5 * std::atan2(2.0 * apq, aqq - app);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const cplx phase = hpq / apq;  // e^{i arg}
  const cplx sp = s * phase;

  const std::size_t n = h.rows();
  // Columns: [p q] <- [p q] * [[c, sp], [-conj(sp), c]]
  for (std::size_t i = 0; i < n; ++i) {
    const cplx hip = h(i, p), hiq = h(i, q);
    h(i, p) = c * hip - std::conj(sp) * hiq;
    h(i, q) = sp * hip + c * hiq;
  }
  // Rows get the adjoint rotation on the left.
  for (std::size_t j = 0; j < n; ++j) {
    const cplx hpj = h(p, j), hqj = h(q, j);
    h(p, j) = c * hpj - sp * hqj;
    h(q, j) = std::conj(sp) * hpj + c * hqj;
  }
  h(p, q) = 0.0;
  h(q, p) = 0.0;
  if (v != nullptr) {
    for (std::size_t i = 0; i < n; ++i) {
      const cplx vip = (*v)(i, p), viq = (*v)(i, q);
      (*v)(i, p) = c * vip - std::conj(sp) * viq;
      (*v)(i, q) = sp * vip + c * viq;
    }
  }
}

double offdiag_norm(const Matrix& h) {
  double s = 0.0;
  for (std::size_t i = 0; i < h.rows(); ++i)
    for (std::size_t j = i + 1; j < h.cols(); ++j) s += std::norm(h(i, j));
  return std::sqrt(2.0 * s);
}

EigenSystem jacobi_impl(const Matrix& input, bool want_vectors) {
  if (!input.square())
    throw std::invalid_argument("hermitian_eigen: matrix is not square");
  if (!input.finite())
    throw std::invalid_argument("hermitian_eigen: non-finite entries");
  const std::size_t n = input.rows();
  Matrix h = input;
  // Work on the Hermitian average so round-off in the caller's matrix
  // cannot push the iteration off-symmetry.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const cplx sym = 0.5 * (h(i, j) + std::conj(input(j, i)));
      h(i, j) = sym;
    }
  Matrix v = want_vectors ? Matrix::identity(n) : Matrix();

  const double scale = std::max(h.max_abs(), 1e-300);
  const double tol = 1e-14 * scale * static_cast<double>(n);
  for (int sweep = 0; sweep < 96; ++sweep) {
    if (offdiag_norm(h) <= tol) break;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q)
        if (std::abs(h(p, q)) > tol / static_cast<double>(n * n))
          jacobi_rotate(h, want_vectors ? &v : nullptr, p, q);
  }

  EigenSystem out;
  out.values.resize(n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = h(i, i).real();
  std::stable_sort(order.begin(), order.end(),
                   [&diag](std::size_t a, std::size_t b) { return diag[a] > diag[b]; });
  for (std::size_t k = 0; k < n; ++k) out.values[k] = diag[order[k]];
  if (want_vectors) {
    out.vectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

}  // namespace

EigenSystem hermitian_eigen(const Matrix& h) { return jacobi_impl(h, true); }

std::vector<double> hermitian_eigenvalues(const Matrix& h) {
  return jacobi_impl(h, false).values;
}

Svd svd(const Matrix& a) {
  if (!a.finite()) throw std::invalid_argument("svd: non-finite entries");
  const std::size_t m = a.rows(), n = a.cols();
  EigenSystem es = hermitian_eigen(a.adjoint() * a);  // n x n
  Svd out;
  out.v = es.vectors;
  out.singular.resize(n);
  Matrix ucols(m, n);
  std::size_t rank = 0;
  const double tiny = 1e-150;
  for (std::size_t k = 0; k < n; ++k) {
    const double lam = std::max(es.values[k], 0.0);
    const double s = std::sqrt(lam);
    out.singular[k] = s;
    if (s > tiny) {
      for (std::size_t i = 0; i < m; ++i) {
        cplx acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += a(i, j) * es.vectors(j, k);
        ucols(i, k) = acc / s;
      }
      rank = k + 1;
    }
  }
  // Null singular directions get a deterministic completion.
  Matrix lead(m, rank);
  for (std::size_t k = 0; k < rank; ++k)
    for (std::size_t i = 0; i < m; ++i) lead(i, k) = ucols(i, k);
  Matrix full = complete_orthonormal(lead, m);
  out.u = Matrix(m, std::max(n, m));
  for (std::size_t k = 0; k < std::max(n, m); ++k)
    for (std::size_t i = 0; i < m; ++i)
      out.u(i, k) = (k < m) ? full(i, k) : cplx(0.0, 0.0);
  return out;
}

double trace_norm_matrix(const Matrix& a) {
  if (!a.square())
    throw std::invalid_argument("trace_norm: matrix is not square");
  if (!a.finite()) throw std::invalid_argument("trace_norm: non-finite entries");
  std::vector<double> lam = hermitian_eigenvalues(a.adjoint() * a);
  double s = 0.0;
  for (double l : lam) s += std::sqrt(std::max(l, 0.0));
  return s;
}

Matrix psd_sqrt(const Matrix& h, double clamp) {
  EigenSystem es = hermitian_eigen(h);
  const std::size_t n = h.rows();
  for (double& l : es.values) {
    if (l < -clamp) throw numeric_error("psd_sqrt: eigenvalue below clamp");
    l = std::sqrt(std::max(l, 0.0));
  }
  Matrix r(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      cplx acc = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        acc += es.vectors(i, k) * es.values[k] * std::conj(es.vectors(j, k));
      r(i, j) = acc;
    }
  return r;
}

Matrix complete_orthonormal(const Matrix& columns, std::size_t dim) {
  if (columns.rows() != dim && columns.cols() > 0)
    throw std::invalid_argument("complete_orthonormal: row count mismatch");
  Matrix out(dim, dim);
  std::size_t have = 0;
  for (std::size_t k = 0; k < columns.cols(); ++k, ++have)
    for (std::size_t i = 0; i < dim; ++i) out(i, have) = columns(i, k);
  for (std::size_t cand = 0; cand < dim && have < dim; ++cand) {
    std::vector<cplx> v(dim, cplx(0.0, 0.0));
    v[cand] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {  // twice for numerical stability
      for (std::size_t k = 0; k < have; ++k) {
        cplx ov = 0.0;
        for (std::size_t i = 0; i < dim; ++i) ov += std::conj(out(i, k)) * v[i];
        for (std::size_t i = 0; i < dim; ++i) v[i] -= ov * out(i, k);
      }
    }
    double nrm = 0.0;
    for (const auto& z : v) nrm += std::norm(z);
    nrm = std::sqrt(nrm);
    if (nrm > 1e-7) {
      for (std::size_t i = 0; i < dim; ++i) out(i, have) = v[i] / nrm;
      ++have;
    }
  }
  if (have != dim) throw numeric_error("complete_orthonormal: basis completion failed");
  return out;
}

}  // namespace prext
