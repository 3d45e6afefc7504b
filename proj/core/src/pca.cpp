// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#include "mcf/pca.hpp"

#include <cmath>
#include <string>

#include "mcf/errors.hpp"

namespace mcf {

Vector PcaTransform::transform(const Vector& x) const {
  if (x.dim() != input_dim()) {
    throw ValidationError("PcaTransform: expected input dimension " + std::to_string(input_dim()) + ", got " +
                          std::to_string(x.dim()));
  }
  Vector z(k());
  for (std::size_t j = 0; j < k(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < input_dim(); ++i) s += projection(i, j) * ((x[i] - means[i]) / scales[i]);
    z[j] = s;
  }
  return z;
}

Vector PcaTransform::inverse_transform(const Vector& z) const {
  if (z.dim() != k()) throw ValidationError("PcaTransform: feature dimension mismatch");
  Vector x(input_dim());
  for (std::size_t i = 0; i < input_dim(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < k(); ++j) s += projection(i, j) * z[j];
    x[i] = s * scales[i] + means[i];
  }
  return x;
}

PcaTransform fit_pca(std::span<const Vector> data, std::size_t k, bool standardize) {
  if (data.empty()) throw ValidationError("fit_pca: empty data");
  const std::size_t d = data.front().dim();
  if (k == 0) throw ValidationError("fit_pca: k must be >= 1");
  if (k > d) throw ValidationError("fit_pca: k=" + std::to_string(k) + " exceeds input dimension " + std::to_string(d));
  if (data.size() < k + 1) throw ValidationError("fit_pca: need at least k+1 points");
  const double n = static_cast<double>(data.size());

  PcaTransform pca;
  pca.standardized = standardize;
  pca.means = Vector(d);
  for (const auto& x : data) {
    if (x.dim() != d) throw ValidationError("fit_pca: inconsistent point dimensions");
    pca.means += x;
  }
  pca.means *= 1.0 / n;

  pca.scales = Vector(d, 1.0);
  pca.zero_variance.assign(d, false);
  Vector var(d);
  for (const auto& x : data)
    for (std::size_t i = 0; i < d; ++i) var[i] += (x[i] - pca.means[i]) * (x[i] - pca.means[i]);
  for (std::size_t i = 0; i < d; ++i) {
    var[i] /= n - 1.0;
    if (var[i] <= 0.0) {
      pca.zero_variance[i] = true;
    } else if (standardize) {
      pca.scales[i] = std::sqrt(var[i]);
    }
  }

  Matrix cov(d, d);
  for (const auto& x : data) {
    for (std::size_t i = 0; i < d; ++i) {
      const double di = (x[i] - pca.means[i]) / pca.scales[i];
      for (std::size_t j = i; j < d; ++j) cov(i, j) += di * ((x[j] - pca.means[j]) / pca.scales[j]);
    }
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      cov(i, j) /= n - 1.0;
      cov(j, i) = cov(i, j);
    }

  const auto eig = sym_eig(SymmetricMatrix(std::move(cov)));
  double total = 0.0;
  for (double v : eig.values) total += std::max(v, 0.0);

  pca.projection = Matrix(d, k);
  pca.explained_ratio = Vector(k);
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t src = d - 1 - j;  // eigenvalues ascend
    // Sign convention: largest-magnitude loading is positive.
    std::size_t arg = 0;
    for (std::size_t i = 1; i < d; ++i)
      if (std::abs(eig.vectors(i, src)) > std::abs(eig.vectors(arg, src))) arg = i;
    const double sign = eig.vectors(arg, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < d; ++i) pca.projection(i, j) = sign * eig.vectors(i, src);
    pca.explained_ratio[j] = total > 0.0 ? std::max(eig.values[src], 0.0) / total : 0.0;
  }
  return pca;
}

PcaTransform identity_pca(std::size_t dim) {
  PcaTransform pca;
  pca.means = Vector(dim);
  pca.scales = Vector(dim, 1.0);
  pca.projection = Matrix::identity(dim);
  pca.explained_ratio = Vector(dim, 1.0 / static_cast<double>(dim));
  pca.zero_variance.assign(dim, false);
  pca.standardized = false;
  return pca;
}

}  // namespace mcf
