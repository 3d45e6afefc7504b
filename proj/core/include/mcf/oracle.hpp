// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mcf/expfam.hpp"

namespace mcf {

struct PullbackWeights {
  Vector weights;         // in [0, 1], max weight 1
  double achieved_gamma;  // 1 − ‖achieved − g‖ / ‖m − g‖ in mean space
  bool reached;           // weighted mean equals the target within 1e-8 (relative)
};

/// Weights whose weighted mean sufficient statistic is
///   g + (1 − γ)(m − g),   g = mean_map(θ_good), m = mean of T(xᵢ).
/// First tries a linear tilt wᵢ ∝ 1 + βᵀ(T(xᵢ) − m); if that goes negative,
/// solves the clipped tilt by semi-smooth Newton; if that fails, picks the
/// prefix of points nearest g whose mean comes closest to the target.
/// γ must be in [0, 1].
PullbackWeights oracle_pullback_weights(const ExpFamilyModel& model, const Dataset& candidates,
                                        const Parameter& theta_good, double gamma);

}  // namespace mcf
