// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mcf/contraction.hpp"
#include "mcf/expfam.hpp"
#include "mcf/filter_data.hpp"
#include "mcf/random.hpp"

namespace mcf {

/// Weights of the one-hidden-layer filter
///   g(z) = sigmoid(w2 · relu(W1 z + b1) + b2).
/// Stored flat as [W1 (row-major, hidden x features) | b1 | w2 | b2]; the
/// same type carries gradients and Adam moments.
class FilterParams {
 public:
  FilterParams() = default;
  FilterParams(std::size_t hidden, std::size_t features);
  FilterParams(std::size_t hidden, std::size_t features, std::vector<double> flat);

  /// Glorot-uniform weights in ±√(6/(fan_in + fan_out)), zero biases.
  static FilterParams glorot(std::size_t hidden, std::size_t features, RngState& rng);

  std::size_t hidden() const noexcept { return hidden_; }
  std::size_t features() const noexcept { return features_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<double> w1() noexcept { return {values_.data(), hidden_ * features_}; }
  std::span<const double> w1() const noexcept { return {values_.data(), hidden_ * features_}; }
  std::span<double> b1() noexcept { return {values_.data() + hidden_ * features_, hidden_}; }
  std::span<const double> b1() const noexcept { return {values_.data() + hidden_ * features_, hidden_}; }
  std::span<double> w2() noexcept { return {values_.data() + hidden_ * (features_ + 1), hidden_}; }
  std::span<const double> w2() const noexcept { return {values_.data() + hidden_ * (features_ + 1), hidden_}; }
  double& b2() noexcept { return values_.back(); }
  double b2() const noexcept { return values_.back(); }

  std::vector<double>& flat() noexcept { return values_; }
  const std::vector<double>& flat() const noexcept { return values_; }

  bool same_shape(const FilterParams& other) const noexcept {
    return hidden_ == other.hidden_ && features_ == other.features_;
  }

  friend bool operator==(const FilterParams&, const FilterParams&) = default;

 private:
  std::size_t hidden_ = 0;
  std::size_t features_ = 0;
  std::vector<double> values_;
};

/// Filter weight in (0, 1) for one feature vector.
double forward(const FilterParams& params, const Vector& z);

/// Reference points of the contraction constraint. e_est is frozen before
/// training starts.
struct Anchors {
  Parameter theta_est;   // estimate from all points
  Parameter theta_good;  // estimate from good points (or θ* for oracle runs)
  Vector e_est;          // theta_est − theta_good
  bool oracle_reference = false;
};

/// θ_est from all points and θ_good from the good-labeled points, unless a
/// reference parameter is supplied (flagged as oracle, non-deployable).
Anchors compute_anchors(const ExpFamilyModel& model, const LabeledDataset& data,
                        const std::optional<Parameter>& theta_good_override = std::nullopt);

struct TrainConfig {
  double lambda = 1.0;          // contraction-loss weight
  double ess_weight = 0.0;      // μ; 0 disables the ESS penalty
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t epochs = 1000;
  std::size_t hidden_dim = 128;
  ContractionFn contraction = ContractionFn::example_sqrt();
  std::optional<SymmetricMatrix> metric;  // identity when unset
  std::optional<Vector> theta_good_override;

  LyapunovMetric lyapunov(std::size_t dim) const;
  void validate() const;
};

struct LossParts {
  double total = 0.0;
  double classification = 0.0;
  double contraction = 0.0;
  double ess = 0.0;
};

/// Mean binary cross-entropy with probabilities clamped to [1e-12, 1 − 1e-12].
double classification_loss(const FilterParams& params, const LabeledDataset& data);

/// max(0, V(e_new) − (1 − c(e_est)) V(e_est)) with θ_new the weighted
/// estimate under the filter weights.
double contraction_loss(const FilterParams& params, const LabeledDataset& data, const Anchors& anchors,
                        const ContractionFn& c, const LyapunovMetric& metric, const ExpFamilyModel& model);

/// μ · (1 − ESS/N) with ESS = (Σw)² / Σw²; returned without the μ factor.
double ess_penalty(std::span<const double> weights);

LossParts total_loss(const FilterParams& params, const LabeledDataset& data, const ExpFamilyModel& model,
                     const Anchors& anchors, const TrainConfig& config);

struct LossGradient {
  LossParts loss;
  FilterParams gradient;
};

/// Analytic gradient of total_loss by backpropagation through the sigmoid,
/// ReLU, weighted mean and (∇Φ)⁻¹.
LossGradient loss_gradient(const FilterParams& params, const LabeledDataset& data, const ExpFamilyModel& model,
                           const Anchors& anchors, const TrainConfig& config);

struct AdamState {
  FilterParams first_moment;
  FilterParams second_moment;
  std::size_t step = 0;

  static AdamState zeros_like(const FilterParams& params);
};

struct AdamResult {
  FilterParams params;
  AdamState state;
};

/// One bias-corrected Adam update.
AdamResult adam_step(const FilterParams& params, const FilterParams& gradient, const AdamState& state,
                     const TrainConfig& config);

struct TrainLogEntry {
  std::size_t epoch;
  LossParts loss;
};

struct TrainResult {
  FilterParams params;
  std::vector<TrainLogEntry> log;  // losses at the parameters entering each epoch
  Anchors anchors;
  LossParts final_loss;  // at the returned parameters
};

/// Full-batch training: `epochs` rounds of loss_gradient + adam_step.
TrainResult train_filter(const ExpFamilyModel& model, const LabeledDataset& data, const TrainConfig& config,
                         RngState& rng);

/// Fraction of points whose weight is on the same side of 0.5 as the label.
double classification_accuracy(const FilterParams& params, const LabeledDataset& data);

struct ContractionCertificate {
  double v_new;
  double bound;  // (1 − c(e_est)) V(e_est)
  bool holds;
};

/// Recomputes V(e_new) <= (1 − c(e_est)) V(e_est) from scratch with
/// weighted_estimate and quad_form.
ContractionCertificate verify_contraction(const FilterParams& params, const LabeledDataset& data,
                                          const ExpFamilyModel& model, const Anchors& anchors,
                                          const ContractionFn& c, const LyapunovMetric& metric);

}  // namespace mcf
