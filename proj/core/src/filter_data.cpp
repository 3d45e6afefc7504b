// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#include "mcf/filter_data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mcf/errors.hpp"

namespace mcf {

std::size_t LabeledDataset::good_count() const noexcept {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
}

void LabeledDataset::validate() const {
  if (features.size() != points.size() || labels.size() != points.size()) {
    throw ValidationError("LabeledDataset: points, features and labels differ in length");
  }
  for (auto y : labels)
    if (y > 1) throw ValidationError("LabeledDataset: labels must be 0 or 1");
  for (std::size_t i = 1; i < features.size(); ++i)
    if (features[i].dim() != features[0].dim()) throw ValidationError("LabeledDataset: ragged features");
}

LabeledDataset label_by_distance(const ExpFamilyModel& model, const Dataset& candidates,
                                 const Parameter& reference, double good_fraction) {
  if (candidates.empty()) throw ValidationError("label_by_distance: no candidates");
  if (!(good_fraction > 0.0 && good_fraction < 1.0)) {
    throw ValidationError("label_by_distance: good_fraction must be in (0, 1)");
  }
  const Vector center = mean_map(model, reference);
  const std::size_t n = candidates.size();
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = norm(candidates[i] - center);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });

  // The small offset keeps products like 0.7 * 10 from rounding up to 8.
  const auto good = std::min(
      n, static_cast<std::size_t>(std::ceil(good_fraction * static_cast<double>(n) - 1e-9)));

  LabeledDataset out;
  out.points = candidates;
  out.features = candidates;
  out.labels.assign(n, 0);
  for (std::size_t r = 0; r < good; ++r) out.labels[order[r]] = 1;
  return out;
}

void apply_features(LabeledDataset& data, const PcaTransform& pca) {
  data.features.clear();
  data.features.reserve(data.points.size());
  for (const auto& x : data.points) data.features.push_back(pca.transform(x));
}

LabeledDataset merge(const std::vector<LabeledDataset>& parts) {
  LabeledDataset out;
  for (const auto& p : parts) {
    out.points.insert(out.points.end(), p.points.begin(), p.points.end());
    out.features.insert(out.features.end(), p.features.begin(), p.features.end());
    out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
  }
  return out;
}

DriftData simulate_drift_training_data(const ExpFamilyModel& model, const Parameter& theta_star,
                                       std::size_t rounds, std::size_t candidates_per_round,
                                       double contamination, RngState& rng) {
  if (!(contamination > 0.0 && contamination < 1.0)) {
    throw ValidationError("simulate_drift_training_data: contamination must be in (0, 1)");
  }
  if (rounds == 0 || candidates_per_round == 0) {
    throw ValidationError("simulate_drift_training_data: rounds and candidates must be >= 1");
  }
  DriftData out;
  Parameter current = theta_star;
  out.trace.push_back(current.theta);
  for (std::size_t r = 0; r < rounds; ++r) {
    Dataset candidates = sample(model, current, candidates_per_round, rng);
    out.rounds.push_back(label_by_distance(model, candidates, theta_star, 1.0 - contamination));
    current = estimate(model, candidates);
    out.trace.push_back(current.theta);
  }
  return out;
}

}  // namespace mcf
