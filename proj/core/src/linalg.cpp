// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#include "mcf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mcf/errors.hpp"

namespace mcf {

namespace {

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ValidationError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                          " vs " + std::to_string(b) + ")");
  }
}

bool finite_range(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

// ---------------------------------------------------------------------------
// Vector

Vector::Vector(std::size_t dim, double fill) : values_(dim, fill) {
  if (!std::isfinite(fill)) throw ValidationError("Vector: non-finite fill value");
}

Vector::Vector(std::initializer_list<double> values) : values_(values) {
  if (!all_finite()) throw ValidationError("Vector: non-finite entry");
}

Vector::Vector(std::vector<double> values) : values_(std::move(values)) {
  if (!all_finite()) throw ValidationError("Vector: non-finite entry");
}

Vector& Vector::operator+=(const Vector& other) {
  require_same_dim(dim(), other.dim(), "Vector +=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Vector& Vector::operator-=(const Vector& other) {
  require_same_dim(dim(), other.dim(), "Vector -=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Vector& Vector::operator*=(double scale) noexcept {
  for (auto& x : values_) x *= scale;
  return *this;
}

bool Vector::all_finite() const noexcept { return finite_range(values_); }

Vector operator+(Vector lhs, const Vector& rhs) { return lhs += rhs; }
Vector operator-(Vector lhs, const Vector& rhs) { return lhs -= rhs; }
Vector operator*(double scale, Vector v) { return v *= scale; }
Vector operator*(Vector v, double scale) { return v *= scale; }

double dot(const Vector& a, const Vector& b) {
  require_same_dim(a.dim(), b.dim(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(const Vector& v) noexcept {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

double norm(const Vector& v) noexcept { return std::sqrt(squared_norm(v)); }

// ---------------------------------------------------------------------------
// Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (data_.size() != rows * cols) {
    throw ValidationError("Matrix: expected " + std::to_string(rows * cols) + " values, got " +
                          std::to_string(data_.size()));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ValidationError("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(const Vector& diag) {
  Matrix m(diag.dim(), diag.dim());
  for (std::size_t i = 0; i < diag.dim(); ++i) m(i, i) = diag[i];
  return m;
}

Vector Matrix::column(std::size_t j) const {
  Vector c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix& Matrix::operator*=(double scale) noexcept {
  for (auto& x : data_) x *= scale;
  return *this;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) throw ValidationError("Matrix +=: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) throw ValidationError("Matrix -=: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

double Matrix::max_abs() const noexcept {
  double m = 0.0;
  for (double x : data_) m = std::max(m, std::abs(x));
  return m;
}

bool Matrix::all_finite() const noexcept { return finite_range(data_); }

Matrix operator*(const Matrix& a, const Matrix& b) {
  require_same_dim(a.cols(), b.rows(), "Matrix product");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Vector operator*(const Matrix& a, const Vector& v) {
  require_same_dim(a.cols(), v.dim(), "Matrix-vector product");
  Vector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

Matrix operator*(double scale, Matrix m) { return m *= scale; }
Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }

// ---------------------------------------------------------------------------
// SymmetricMatrix

SymmetricMatrix::SymmetricMatrix(Matrix m) : m_(std::move(m)) {
  if (!m_.square()) throw ValidationError("SymmetricMatrix: matrix is not square");
  if (!m_.all_finite()) throw ValidationError("SymmetricMatrix: non-finite entry");
  for (std::size_t i = 0; i < m_.rows(); ++i)
    for (std::size_t j = i + 1; j < m_.cols(); ++j)
      if (m_(i, j) != m_(j, i)) {
        throw ValidationError("SymmetricMatrix: entry (" + std::to_string(i) + "," +
                              std::to_string(j) + ") differs from its transpose");
      }
}

SymmetricMatrix::SymmetricMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : SymmetricMatrix(Matrix(rows)) {}

SymmetricMatrix SymmetricMatrix::identity(std::size_t n) { return SymmetricMatrix(Matrix::identity(n)); }

SymmetricMatrix SymmetricMatrix::diagonal(const Vector& diag) {
  return SymmetricMatrix(Matrix::diagonal(diag));
}

SymmetricMatrix SymmetricMatrix::zeros(std::size_t n) { return SymmetricMatrix(Matrix(n, n)); }

SymmetricMatrix SymmetricMatrix::symmetrize(const Matrix& m) {
  if (!m.square()) throw ValidationError("symmetrize: matrix is not square");
  Matrix s(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    s(i, i) = m(i, i);
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  return SymmetricMatrix(std::move(s));
}

bool SymmetricMatrix::is_identity() const noexcept {
  for (std::size_t i = 0; i < dim(); ++i)
    for (std::size_t j = 0; j < dim(); ++j)
      if (m_(i, j) != (i == j ? 1.0 : 0.0)) return false;
  return true;
}

bool SymmetricMatrix::is_zero() const noexcept { return m_.max_abs() == 0.0; }

// ---------------------------------------------------------------------------
// Decompositions

EigenDecomposition sym_eig(const SymmetricMatrix& sym) {
  const std::size_t n = sym.dim();
  Matrix a = sym.matrix();
  Matrix v = Matrix::identity(n);

  auto off_diagonal = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
    return s;
  };
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) total += a(i, j) * a(i, j);

  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal() <= 1e-32 * total) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::hypot(1.0, tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // A <- A J
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        // A <- Jᵀ A
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

  EigenDecomposition out{Vector(n), Matrix(n, n)};
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
  }
  return out;
}

double quad_form(const SymmetricMatrix& m, const Vector& v) {
  require_same_dim(m.dim(), v.dim(), "quad_form");
  double s = 0.0;
  for (std::size_t i = 0; i < v.dim(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < v.dim(); ++j) row += m(i, j) * v[j];
    s += v[i] * row;
  }
  return s;
}

bool is_spd(const SymmetricMatrix& m, double tol) {
  if (m.dim() == 0) return false;
  return sym_eig(m).values[0] > tol;
}

Matrix cholesky(const SymmetricMatrix& m) {
  const std::size_t n = m.dim();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) throw ValidationError("cholesky: matrix is not positive definite");
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

SymmetricMatrix spd_inverse(const SymmetricMatrix& m) {
  const auto eig = sym_eig(m);
  const std::size_t n = m.dim();
  if (n == 0 || !(eig.values[0] > 0.0)) throw ValidationError("spd_inverse: matrix is not positive definite");
  Matrix inv(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = 1.0 / eig.values[k];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) inv(i, j) += w * eig.vectors(i, k) * eig.vectors(j, k);
  }
  return SymmetricMatrix::symmetrize(inv);
}

Vector spd_solve(const SymmetricMatrix& m, const Vector& b) {
  require_same_dim(m.dim(), b.dim(), "spd_solve");
  const Matrix l = cholesky(m);
  const std::size_t n = m.dim();
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
    y[i] = s / l(i, i);
  }
  Vector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
    x[ii] = s / l(ii, ii);
  }
  return x;
}

}  // namespace mcf
