// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
//
// Hand-rolled generators for property tests. They draw from a private
// std::mt19937_64 so test inputs never share a stream with the code under test.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "mcf/linalg.hpp"

namespace mcf::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  std::size_t index(std::size_t lo, std::size_t hi) {  // inclusive
    return std::uniform_int_distribution<std::size_t>(lo, hi)(engine_);
  }
  std::uint64_t u64() { return engine_(); }

  Vector vector(std::size_t dim, double scale = 1.0) {
    Vector v(dim);
    for (auto& x : v) x = scale * normal();
    return v;
  }

  Vector unit_vector(std::size_t dim) {
    Vector v = vector(dim);
    const double n = norm(v);
    return n > 0.0 ? (1.0 / n) * v : unit_vector(dim);
  }

  Matrix matrix(std::size_t rows, std::size_t cols, double scale = 1.0) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) m(i, j) = scale * normal();
    return m;
  }

  SymmetricMatrix symmetric(std::size_t dim) { return SymmetricMatrix::symmetrize(matrix(dim, dim)); }

  /// B Bᵀ + floor·I.
  SymmetricMatrix spd(std::size_t dim, double floor = 0.1) {
    const Matrix b = matrix(dim, dim);
    Matrix m = b * b.transpose();
    for (std::size_t i = 0; i < dim; ++i) m(i, i) += floor;
    return SymmetricMatrix::symmetrize(m);
  }

 private:
  std::mt19937_64 engine_;
};

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).max_abs(); }

}  // namespace mcf::testing
