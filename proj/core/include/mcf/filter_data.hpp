// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "mcf/expfam.hpp"
#include "mcf/pca.hpp"
#include "mcf/random.hpp"

namespace mcf {

/// Points with their filter features and binary good/bad labels.
struct LabeledDataset {
  Dataset points;
  std::vector<Vector> features;
  std::vector<std::uint8_t> labels;  // 1 = good, 0 = bad

  std::size_t size() const noexcept { return points.size(); }
  std::size_t good_count() const noexcept;
  /// Throws ValidationError unless the three lists are parallel and labels binary.
  void validate() const;
};

/// Labels the ceil(good_fraction·N) candidates closest (Euclidean) to the
/// reference parameter's mean as good. Ties keep the original order.
/// Features are initialized to the raw points.
LabeledDataset label_by_distance(const ExpFamilyModel& model, const Dataset& candidates,
                                 const Parameter& reference, double good_fraction);

/// Replaces features with pca.transform(point).
void apply_features(LabeledDataset& data, const PcaTransform& pca);

LabeledDataset merge(const std::vector<LabeledDataset>& parts);

struct DriftData {
  std::vector<LabeledDataset> rounds;
  std::vector<Vector> trace;  // current estimate θ_t entering each round, plus the final one
};

/// Per round: sample candidates around the current estimate θ_t, label by
/// distance to θ* with good_fraction = 1 − contamination, then move θ_{t+1}
/// to the all-sample estimate. Starts at θ_0 = θ*.
DriftData simulate_drift_training_data(const ExpFamilyModel& model, const Parameter& theta_star,
                                       std::size_t rounds, std::size_t candidates_per_round,
                                       double contamination, RngState& rng);

}  // namespace mcf
