// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace mcf {

/// Dense real vector. Construction from external values rejects non-finite
/// entries; arithmetic on existing vectors is unchecked.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t dim, double fill = 0.0);
  Vector(std::initializer_list<double> values);
  explicit Vector(std::vector<double> values);

  std::size_t dim() const noexcept { return values_.size(); }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }
  std::span<double> span() noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  Vector& operator+=(const Vector& other);
  Vector& operator-=(const Vector& other);
  Vector& operator*=(double scale) noexcept;

  bool all_finite() const noexcept;

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> values_;
};

Vector operator+(Vector lhs, const Vector& rhs);
Vector operator-(Vector lhs, const Vector& rhs);
Vector operator*(double scale, Vector v);
Vector operator*(Vector v, double scale);

double dot(const Vector& a, const Vector& b);
double squared_norm(const Vector& v) noexcept;
double norm(const Vector& v) noexcept;

/// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(const Vector& diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<const double> row_major() const noexcept { return data_; }
  Vector column(std::size_t j) const;

  Matrix transpose() const;
  Matrix& operator*=(double scale) noexcept;
  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);

  double max_abs() const noexcept;
  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, const Vector& v);
Matrix operator*(double scale, Matrix m);
Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);

/// Square matrix with entries[i][j] == entries[j][i] bit-for-bit and all
/// entries finite. Both invariants are checked on construction.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(Matrix m);
  SymmetricMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static SymmetricMatrix identity(std::size_t n);
  static SymmetricMatrix diagonal(const Vector& diag);
  static SymmetricMatrix zeros(std::size_t n);
  /// Averages m with its transpose; use for numerically near-symmetric input.
  static SymmetricMatrix symmetrize(const Matrix& m);

  std::size_t dim() const noexcept { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return m_(i, j); }
  const Matrix& matrix() const noexcept { return m_; }

  bool is_identity() const noexcept;
  bool is_zero() const noexcept;

  friend bool operator==(const SymmetricMatrix&, const SymmetricMatrix&) = default;

 private:
  Matrix m_;
};

struct EigenDecomposition {
  Vector values;   // ascending
  Matrix vectors;  // column j is the eigenvector for values[j]
};

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
EigenDecomposition sym_eig(const SymmetricMatrix& m);

/// vᵀ m v.
double quad_form(const SymmetricMatrix& m, const Vector& v);

/// True iff the smallest eigenvalue of m exceeds tol.
bool is_spd(const SymmetricMatrix& m, double tol);

/// Lower-triangular L with L Lᵀ = m. Throws ValidationError unless m is SPD.
Matrix cholesky(const SymmetricMatrix& m);

/// m^{-1}, via the eigendecomposition. Throws ValidationError if m is singular.
SymmetricMatrix spd_inverse(const SymmetricMatrix& m);

/// Solves m x = b for SPD m.
Vector spd_solve(const SymmetricMatrix& m, const Vector& b);

}  // namespace mcf
