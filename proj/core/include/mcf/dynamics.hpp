// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "mcf/contraction.hpp"
#include "mcf/expfam.hpp"
#include "mcf/filter.hpp"
#include "mcf/random.hpp"

namespace mcf {

/// Trials whose V exceeds this are stopped and marked diverged.
inline constexpr double kDivergenceThreshold = 1e12;

/// Noise variance schedule σ_t² with the metric the noise is shaped by.
class NoiseSchedule {
 public:
  enum class Kind { kZero, kPowerLaw, kConstant };

  static NoiseSchedule zero(LyapunovMetric metric);
  /// σ_t² = scale · max(t, 1)^{-β}, β > 0.
  static NoiseSchedule power_law(double beta, double scale, LyapunovMetric metric);
  /// σ_t² = scale for all t. Does not vanish; for negative controls only.
  static NoiseSchedule constant(double scale, LyapunovMetric metric);

  Kind kind() const noexcept { return kind_; }
  double beta() const noexcept { return beta_; }
  double scale() const noexcept { return scale_; }
  const LyapunovMetric& metric() const noexcept { return metric_; }
  std::size_t dim() const noexcept { return metric_.dim(); }
  bool vanishing() const noexcept { return kind_ != Kind::kConstant; }

  double variance(std::size_t t) const noexcept;
  /// ξ ~ N(0, (σ_t²/dim) P⁻¹).
  Vector sample(std::size_t t, RngState& rng) const;

 private:
  NoiseSchedule(Kind kind, double beta, double scale, LyapunovMetric metric);

  Kind kind_;
  double beta_;
  double scale_;
  LyapunovMetric metric_;
  Matrix factor_;  // Cholesky factor of P⁻¹; empty for the identity metric
};

/// ξ ~ N(0, (σ_t²/dim) P⁻¹), so E[ξᵀPξ] = σ_t².
Vector sample_noise(const NoiseSchedule& schedule, std::size_t t, std::size_t dim, RngState& rng);

/// Per-generation sample counts.
struct SampleSchedule {
  enum class Kind { kConstant, kPower };

  Kind kind = Kind::kConstant;
  std::size_t base = 100;
  double exponent = 0.0;

  static SampleSchedule constant(std::size_t n);
  /// n_t = ceil(base · t^exponent).
  static SampleSchedule power(std::size_t base, double exponent);

  /// n_t for generation t ≥ 1; generation 0 (the real-data fit) uses base.
  std::size_t at(std::size_t t) const;
  void validate() const;
};

/// Per-step record of one simulated run, stored flat. After the step that
/// crossed the divergence threshold the remaining steps hold +inf.
class ErrorTrajectory {
 public:
  ErrorTrajectory() = default;
  ErrorTrajectory(std::size_t dim, std::size_t horizon, std::uint64_t trial, std::uint64_t seed);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t horizon() const noexcept { return v_.empty() ? 0 : v_.size() - 1; }
  std::size_t size() const noexcept { return v_.size(); }
  std::uint64_t trial() const noexcept { return trial_; }
  std::uint64_t seed() const noexcept { return seed_; }

  std::span<const double> error(std::size_t t) const { return {errors_.data() + t * dim_, dim_}; }
  Vector error_vector(std::size_t t) const;
  double v(std::size_t t) const { return v_[t]; }
  double squared_error(std::size_t t) const { return sq_[t]; }
  std::size_t n(std::size_t t) const { return n_[t]; }
  std::span<const double> v_values() const noexcept { return v_; }

  std::optional<std::size_t> diverged_at() const noexcept { return diverged_at_; }

  void record(std::size_t t, const Vector& e, double v, std::size_t n);
  void mark_diverged(std::size_t t);

  friend bool operator==(const ErrorTrajectory&, const ErrorTrajectory&) = default;

 private:
  std::size_t dim_ = 0;
  std::uint64_t trial_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<double> errors_;
  std::vector<double> v_;
  std::vector<double> sq_;
  std::vector<std::size_t> n_;
  std::optional<std::size_t> diverged_at_;
};

/// e_{t+1} = A(e_t) e_t + ξ_t for t = 0..horizon−1. V is measured in the
/// map's metric. Throws OverflowError if the state turns non-finite.
ErrorTrajectory simulate_error_dynamics(const ContractionMap& map, const NoiseSchedule& noise, const Vector& e0,
                                        std::size_t horizon, RngState& rng);

struct WorkflowOptions {
  /// Real-sample count for the initial fit; schedule.base when unset.
  std::optional<std::size_t> initial_samples;
  /// Start from θ̂₀ = θ* + offset instead of fitting real samples.
  std::optional<Vector> initial_offset;
  /// Metric for the recorded V; identity when unset.
  std::optional<SymmetricMatrix> metric;
  std::uint64_t trial = 0;
};

/// Unfiltered chain: θ̂₀ fit on real data from θ*, then generation t draws
/// n_t points from P_{θ̂_{t−1}} and re-estimates.
ErrorTrajectory run_workflow(const ExpFamilyModel& model, const Parameter& theta_star, const SampleSchedule& schedule,
                             std::size_t horizon, RngState& rng, const WorkflowOptions& options = {});

/// As run_workflow, but each generation draws candidates (candidates_per_round,
/// or n_t when that is 0), weights them with the filter and sets θ̂_t to the
/// weighted estimate. The all-ones filter with candidates_per_round = 0
/// reproduces run_workflow bit-for-bit.
ErrorTrajectory run_workflow_filtered(const ExpFamilyModel& model, const Parameter& theta_star,
                                      const SampleSchedule& schedule, std::size_t horizon,
                                      const FilterHandle& filter, std::size_t candidates_per_round, RngState& rng,
                                      const WorkflowOptions& options = {});

/// Per-step aggregates across trials.
struct TrialStats {
  std::vector<double> deltas;
  std::vector<std::size_t> n;                 // n_t of the first trajectory
  std::vector<double> mse;                    // mean ‖e_t‖²; +inf once any trial diverged
  std::vector<double> mean_v;                 // mean V_t
  std::vector<std::vector<double>> exceed;    // [delta][t], fraction with ‖e_t‖ > δ
  std::size_t trials = 0;
  std::size_t diverged = 0;

  std::size_t steps() const noexcept { return mse.size(); }
};

/// Streaming fold of trajectories in the order they are added.
class TrialAccumulator {
 public:
  explicit TrialAccumulator(std::vector<double> deltas);

  void add(const ErrorTrajectory& trajectory);
  TrialStats finish() const;

 private:
  std::vector<double> deltas_;
  std::size_t horizon_ = 0;
  std::size_t trials_ = 0;
  std::size_t diverged_ = 0;
  std::vector<std::size_t> n_;
  std::vector<double> sum_sq_;
  std::vector<double> sum_v_;
  std::vector<std::vector<std::size_t>> exceed_counts_;
};

/// Folds the trajectories in order. Rejects an empty list or mixed horizons.
TrialStats aggregate_exceedance(std::span<const ErrorTrajectory> trajectories, std::span<const double> deltas);

using TrialFn = std::function<ErrorTrajectory(std::size_t trial, RngState& rng)>;

/// Runs `trials` independent trials, trial k on base.substream(k), across
/// worker_count() threads, and folds them in trial order. Any failure is
/// rethrown as TrialError with the lowest failing trial index.
TrialStats run_monte_carlo(std::size_t trials, std::span<const double> deltas, const RngState& base,
                           const TrialFn& trial_fn);

}  // namespace mcf
