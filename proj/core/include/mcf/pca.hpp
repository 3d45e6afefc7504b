// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "mcf/linalg.hpp"

namespace mcf {

/// Standardize-then-project feature map z = Wᵀ((x − mean) / scale).
struct PcaTransform {
  Vector means;
  Vector scales;                    // 1 where standardization is off or the feature is constant
  Matrix projection;                // input_dim x k, orthonormal columns
  Vector explained_ratio;           // per component, nonincreasing
  std::vector<bool> zero_variance;  // features that got a unit divisor
  bool standardized = true;

  std::size_t input_dim() const noexcept { return projection.rows(); }
  std::size_t k() const noexcept { return projection.cols(); }

  Vector transform(const Vector& x) const;
  Vector inverse_transform(const Vector& z) const;
};

/// Fits a k-component PCA. Needs at least k + 1 points and 1 <= k <= dim.
PcaTransform fit_pca(std::span<const Vector> data, std::size_t k, bool standardize = true);

/// Identity-equivalent transform (no centering, unit scales, identity projection).
PcaTransform identity_pca(std::size_t dim);

}  // namespace mcf
