// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#include "mcf/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include "mcf/errors.hpp"
#include "mcf/parallel.hpp"

namespace mcf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <typename E>
[[noreturn]] void rethrow_with_generation(const E& e, std::size_t t) {
  throw E("generation " + std::to_string(t) + ": " + e.what());
}

LyapunovMetric workflow_metric(const WorkflowOptions& options, std::size_t dim) {
  if (!options.metric) return LyapunovMetric::identity(dim);
  if (options.metric->dim() != dim) throw ValidationError("workflow: metric dimension does not match the model");
  return LyapunovMetric(*options.metric);
}

// Fits θ̂₀ and records generation 0.
Parameter initial_estimate(const ExpFamilyModel& model, const Parameter& theta_star, const SampleSchedule& schedule,
                           const WorkflowOptions& options, const LyapunovMetric& metric, ErrorTrajectory& traj,
                           RngState& rng) {
  if (theta_star.dim() != model.dim()) throw ValidationError("workflow: θ* dimension does not match the model");
  schedule.validate();
  Parameter theta;
  std::size_t n0 = 0;
  if (options.initial_offset) {
    if (options.initial_offset->dim() != model.dim()) throw ValidationError("workflow: initial offset dimension");
    theta = Parameter{theta_star.theta + *options.initial_offset};
  } else {
    n0 = options.initial_samples.value_or(schedule.base);
    if (n0 == 0) throw ValidationError("workflow: initial_samples must be >= 1");
    try {
      theta = estimate(model, sample(model, theta_star, n0, rng));
    } catch (const BoundaryError& e) {
      rethrow_with_generation(e, 0);
    }
  }
  const Vector e0 = theta.theta - theta_star.theta;
  traj.record(0, e0, lyapunov_value(metric, e0), n0);
  return theta;
}

// Records step t; returns false once the trajectory diverged.
bool record_step(ErrorTrajectory& traj, std::size_t t, const Vector& e, double v, std::size_t n) {
  if (!e.all_finite() || !std::isfinite(v)) throw OverflowError("non-finite state", t);
  traj.record(t, e, v, n);
  if (v > kDivergenceThreshold) {
    traj.mark_diverged(t);
    return false;
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Noise

NoiseSchedule::NoiseSchedule(Kind kind, double beta, double scale, LyapunovMetric metric)
    : kind_(kind), beta_(beta), scale_(scale), metric_(std::move(metric)) {
  if (!(scale_ >= 0.0) || !std::isfinite(scale_)) throw ValidationError("NoiseSchedule: scale must be >= 0");
  if (kind_ == Kind::kPowerLaw && !(beta_ > 0.0)) throw ValidationError("NoiseSchedule: beta must be > 0");
  if (!metric_.is_identity()) factor_ = cholesky(spd_inverse(metric_.p()));
}

NoiseSchedule NoiseSchedule::zero(LyapunovMetric metric) { return {Kind::kZero, 0.0, 0.0, std::move(metric)}; }

NoiseSchedule NoiseSchedule::power_law(double beta, double scale, LyapunovMetric metric) {
  return {Kind::kPowerLaw, beta, scale, std::move(metric)};
}

NoiseSchedule NoiseSchedule::constant(double scale, LyapunovMetric metric) {
  return {Kind::kConstant, 0.0, scale, std::move(metric)};
}

Vector NoiseSchedule::sample(std::size_t t, RngState& rng) const {
  const std::size_t d = dim();
  Vector z(d);
  const double var = variance(t);
  if (var == 0.0) return z;
  for (std::size_t i = 0; i < d; ++i) z[i] = rng.normal();
  const double sd = std::sqrt(var / static_cast<double>(d));
  if (metric_.is_identity()) return sd * z;
  return sd * (factor_ * z);
}

double NoiseSchedule::variance(std::size_t t) const noexcept {
  switch (kind_) {
    case Kind::kZero: return 0.0;
    case Kind::kConstant: return scale_;
    case Kind::kPowerLaw: return scale_ * std::pow(static_cast<double>(std::max<std::size_t>(t, 1)), -beta_);
  }
  return 0.0;
}

Vector sample_noise(const NoiseSchedule& schedule, std::size_t t, std::size_t dim, RngState& rng) {
  if (dim != schedule.dim()) {
    throw ValidationError("sample_noise: dim " + std::to_string(dim) + " does not match the metric dimension " +
                          std::to_string(schedule.dim()));
  }
  return schedule.sample(t, rng);
}

// ---------------------------------------------------------------------------
// Sample schedule

SampleSchedule SampleSchedule::constant(std::size_t n) {
  SampleSchedule s{Kind::kConstant, n, 0.0};
  s.validate();
  return s;
}

SampleSchedule SampleSchedule::power(std::size_t base, double exponent) {
  SampleSchedule s{Kind::kPower, base, exponent};
  s.validate();
  return s;
}

std::size_t SampleSchedule::at(std::size_t t) const {
  if (kind == Kind::kConstant || t == 0) return base;
  const double n = std::ceil(static_cast<double>(base) * std::pow(static_cast<double>(t), exponent));
  if (!(n < 1e15)) throw ValidationError("SampleSchedule: n_t overflow at t=" + std::to_string(t));
  return std::max<std::size_t>(1, static_cast<std::size_t>(n));
}

void SampleSchedule::validate() const {
  if (base == 0) throw ValidationError("SampleSchedule: base must be >= 1");
  if (!(exponent >= 0.0) || !std::isfinite(exponent)) throw ValidationError("SampleSchedule: exponent must be >= 0");
}

// ---------------------------------------------------------------------------
// Trajectory

ErrorTrajectory::ErrorTrajectory(std::size_t dim, std::size_t horizon, std::uint64_t trial, std::uint64_t seed)
    : dim_(dim),
      trial_(trial),
      seed_(seed),
      errors_((horizon + 1) * dim, 0.0),
      v_(horizon + 1, 0.0),
      sq_(horizon + 1, 0.0),
      n_(horizon + 1, 0) {
  if (dim == 0) throw ValidationError("ErrorTrajectory: dim must be >= 1");
}

Vector ErrorTrajectory::error_vector(std::size_t t) const {
  const auto e = error(t);
  Vector out(dim_);
  std::copy(e.begin(), e.end(), out.begin());
  return out;
}

void ErrorTrajectory::record(std::size_t t, const Vector& e, double v, std::size_t n) {
  if (e.dim() != dim_) throw ValidationError("ErrorTrajectory: error dimension mismatch");
  std::copy(e.begin(), e.end(), errors_.begin() + static_cast<std::ptrdiff_t>(t * dim_));
  v_[t] = v;
  sq_[t] = squared_norm(e);
  n_[t] = n;
}

void ErrorTrajectory::mark_diverged(std::size_t t) {
  diverged_at_ = t;
  for (std::size_t s = t + 1; s < v_.size(); ++s) {
    std::fill_n(errors_.begin() + static_cast<std::ptrdiff_t>(s * dim_), dim_, kInf);
    v_[s] = kInf;
    sq_[s] = kInf;
  }
}

// ---------------------------------------------------------------------------
// Simulators

ErrorTrajectory simulate_error_dynamics(const ContractionMap& map, const NoiseSchedule& noise, const Vector& e0,
                                        std::size_t horizon, RngState& rng) {
  if (horizon == 0) throw ValidationError("simulate_error_dynamics: horizon must be >= 1");
  const std::size_t d = map.metric().dim();
  if (e0.dim() != d || noise.dim() != d) throw ValidationError("simulate_error_dynamics: dimension mismatch");
  ErrorTrajectory traj(d, horizon, 0, rng.seed());
  Vector e = e0;
  if (!record_step(traj, 0, e, lyapunov_value(map.metric(), e), 0)) return traj;
  for (std::size_t t = 0; t < horizon; ++t) {
    e = map.apply(e);
    e += sample_noise(noise, t, d, rng);
    if (!record_step(traj, t + 1, e, lyapunov_value(map.metric(), e), 0)) break;
  }
  return traj;
}

ErrorTrajectory run_workflow(const ExpFamilyModel& model, const Parameter& theta_star, const SampleSchedule& schedule,
                             std::size_t horizon, RngState& rng, const WorkflowOptions& options) {
  const LyapunovMetric metric = workflow_metric(options, model.dim());
  ErrorTrajectory traj(model.dim(), horizon, options.trial, rng.seed());
  Parameter theta = initial_estimate(model, theta_star, schedule, options, metric, traj, rng);
  for (std::size_t t = 1; t <= horizon; ++t) {
    const std::size_t n = schedule.at(t);
    try {
      theta = estimate(model, sample(model, theta, n, rng));
    } catch (const BoundaryError& e) {
      rethrow_with_generation(e, t);
    }
    const Vector e = theta.theta - theta_star.theta;
    if (!record_step(traj, t, e, lyapunov_value(metric, e), n)) break;
  }
  return traj;
}

ErrorTrajectory run_workflow_filtered(const ExpFamilyModel& model, const Parameter& theta_star,
                                      const SampleSchedule& schedule, std::size_t horizon,
                                      const FilterHandle& filter, std::size_t candidates_per_round, RngState& rng,
                                      const WorkflowOptions& options) {
  filter.check_input_dim(model.dim());
  const LyapunovMetric metric = workflow_metric(options, model.dim());
  ErrorTrajectory traj(model.dim(), horizon, options.trial, rng.seed());
  Parameter theta = initial_estimate(model, theta_star, schedule, options, metric, traj, rng);
  for (std::size_t t = 1; t <= horizon; ++t) {
    const std::size_t n = candidates_per_round > 0 ? candidates_per_round : schedule.at(t);
    try {
      const Dataset candidates = sample(model, theta, n, rng);
      theta = weighted_estimate(model, candidates, filter.weights(model, candidates));
    } catch (const BoundaryError& e) {
      rethrow_with_generation(e, t);
    } catch (const DegenerateSelectionError& e) {
      rethrow_with_generation(e, t);
    }
    const Vector e = theta.theta - theta_star.theta;
    if (!record_step(traj, t, e, lyapunov_value(metric, e), n)) break;
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Aggregation

TrialAccumulator::TrialAccumulator(std::vector<double> deltas) : deltas_(std::move(deltas)) {
  for (double d : deltas_)
    if (!(d >= 0.0) || !std::isfinite(d)) throw ValidationError("exceedance thresholds must be finite and >= 0");
  exceed_counts_.resize(deltas_.size());
}

void TrialAccumulator::add(const ErrorTrajectory& trajectory) {
  if (trials_ == 0) {
    horizon_ = trajectory.horizon();
    n_.assign(trajectory.size(), 0);
    for (std::size_t t = 0; t < trajectory.size(); ++t) n_[t] = trajectory.n(t);
    sum_sq_.assign(trajectory.size(), 0.0);
    sum_v_.assign(trajectory.size(), 0.0);
    for (auto& c : exceed_counts_) c.assign(trajectory.size(), 0);
  } else if (trajectory.horizon() != horizon_) {
    throw ValidationError("aggregate_exceedance: mixed horizons " + std::to_string(horizon_) + " and " +
                          std::to_string(trajectory.horizon()));
  }
  ++trials_;
  if (trajectory.diverged_at()) ++diverged_;
  for (std::size_t t = 0; t < trajectory.size(); ++t) {
    const double sq = trajectory.squared_error(t);
    sum_sq_[t] += sq;
    sum_v_[t] += trajectory.v(t);
    for (std::size_t k = 0; k < deltas_.size(); ++k)
      if (sq > deltas_[k] * deltas_[k]) ++exceed_counts_[k][t];
  }
}

TrialStats TrialAccumulator::finish() const {
  if (trials_ == 0) throw ValidationError("aggregate_exceedance: no trajectories");
  TrialStats s;
  s.deltas = deltas_;
  s.n = n_;
  s.trials = trials_;
  s.diverged = diverged_;
  const double inv = 1.0 / static_cast<double>(trials_);
  s.mse.resize(sum_sq_.size());
  s.mean_v.resize(sum_v_.size());
  for (std::size_t t = 0; t < sum_sq_.size(); ++t) {
    s.mse[t] = sum_sq_[t] * inv;
    s.mean_v[t] = sum_v_[t] * inv;
  }
  s.exceed.resize(deltas_.size());
  for (std::size_t k = 0; k < deltas_.size(); ++k) {
    s.exceed[k].resize(sum_sq_.size());
    for (std::size_t t = 0; t < sum_sq_.size(); ++t)
      s.exceed[k][t] = static_cast<double>(exceed_counts_[k][t]) * inv;
  }
  return s;
}

TrialStats aggregate_exceedance(std::span<const ErrorTrajectory> trajectories, std::span<const double> deltas) {
  if (trajectories.empty()) throw ValidationError("aggregate_exceedance: no trajectories");
  TrialAccumulator acc(std::vector<double>(deltas.begin(), deltas.end()));
  for (const auto& t : trajectories) acc.add(t);
  return acc.finish();
}

TrialStats run_monte_carlo(std::size_t trials, std::span<const double> deltas, const RngState& base,
                           const TrialFn& trial_fn) {
  if (trials == 0) throw ValidationError("run_monte_carlo: trials must be >= 1");
  TrialAccumulator acc(std::vector<double>(deltas.begin(), deltas.end()));
  const std::size_t chunk = std::max<std::size_t>(16, 4 * worker_count());
  std::vector<ErrorTrajectory> slots(chunk);
  for (std::size_t start = 0; start < trials; start += chunk) {
    const std::size_t count = std::min(chunk, trials - start);
    parallel_for(count, [&](std::size_t i) {
      const std::size_t trial = start + i;
      RngState rng = base.substream(trial);
      try {
        slots[i] = trial_fn(trial, rng);
      } catch (const TrialError&) {
        throw;
      } catch (const std::exception& e) {
        throw TrialError(e.what(), trial);
      }
    });
    for (std::size_t i = 0; i < count; ++i) acc.add(slots[i]);
  }
  return acc.finish();
}

}  // namespace mcf
