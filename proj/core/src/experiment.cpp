// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#include "mcf/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <sstream>

#include "mcf/checkpoint.hpp"
#include "mcf/errors.hpp"
#include "mcf/filter_data.hpp"
#include "mcf/io.hpp"
#include "mcf/parallel.hpp"
#include "mcf/pca.hpp"

namespace mcf {

namespace {

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_short(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Enum names

std::string_view noise_kind_name(NoiseSchedule::Kind k) {
  switch (k) {
    case NoiseSchedule::Kind::kZero: return "zero";
    case NoiseSchedule::Kind::kPowerLaw: return "power-law";
    case NoiseSchedule::Kind::kConstant: return "constant";
  }
  return "unknown";
}

NoiseSchedule::Kind parse_noise_kind(const std::string& s) {
  if (s == "zero") return NoiseSchedule::Kind::kZero;
  if (s == "power-law") return NoiseSchedule::Kind::kPowerLaw;
  if (s == "constant") return NoiseSchedule::Kind::kConstant;
  throw ValidationError("noise.kind: unknown value '" + s + "' (expected zero, power-law or constant)");
}

FilterHandle::Kind parse_filter_kind(const std::string& s) {
  if (s == "all-ones") return FilterHandle::Kind::kAllOnes;
  if (s == "oracle") return FilterHandle::Kind::kOracle;
  if (s == "mlp") return FilterHandle::Kind::kMlp;
  throw ValidationError("filter.kind: unknown value '" + s + "' (expected all-ones, oracle or mlp)");
}

// ---------------------------------------------------------------------------
// Strict JSON access

void reject_unknown(const Json& user, const Json& defaults, const std::string& path) {
  if (!user.is_object() || !defaults.is_object()) return;
  for (const auto& [key, value] : user.items()) {
    const std::string field = path.empty() ? key : path + "." + key;
    const auto it = defaults.find(key);
    if (it == defaults.end()) throw ValidationError("unknown config field '" + field + "'");
    if (it->is_object()) {
      if (!value.is_object()) throw ValidationError("config field '" + field + "' must be an object");
      reject_unknown(value, *it, field);
    }
  }
}

const Json& at(const Json& j, const std::string& key, const std::string& path) {
  const auto it = j.find(key);
  if (it == j.end()) throw ValidationError("missing config field '" + path + key + "'");
  return *it;
}

double get_number(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = at(j, key, path);
  if (!v.is_number()) throw ValidationError("config field '" + path + key + "' must be a number");
  return v.get<double>();
}

std::size_t get_count(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = at(j, key, path);
  if (!v.is_number_unsigned()) {
    throw ValidationError("config field '" + path + key + "' must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

std::string get_string(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = at(j, key, path);
  if (!v.is_string()) throw ValidationError("config field '" + path + key + "' must be a string");
  return v.get<std::string>();
}

bool get_bool(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = at(j, key, path);
  if (!v.is_boolean()) throw ValidationError("config field '" + path + key + "' must be true or false");
  return v.get<bool>();
}

std::optional<Vector> get_optional_vector(const Json& j, const std::string& key, const std::string& path) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return vector_from_json(*it, path + key);
}

Json optional_json(const std::optional<Vector>& v) { return v ? to_json(*v) : Json(nullptr); }

// ---------------------------------------------------------------------------
// Tables

ResultTable table_from_stats(const ExperimentConfig& cfg, const TrialStats& stats, const std::string& hash) {
  ResultTable table{std::string(scenario_name(cfg.scenario)), stats.deltas, {}, hash};
  const std::size_t last = stats.steps() - 1;
  for (std::size_t t = 0; t <= last; ++t) {
    if (t % cfg.record_stride != 0 && t != last) continue;
    ResultRow row{t, stats.n[t], stats.mse[t], stats.mean_v[t], {}, stats.trials};
    for (const auto& e : stats.exceed) row.exceed.push_back(e[t]);
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<double> as_doubles(std::size_t count) {
  std::vector<double> t(count);
  std::iota(t.begin(), t.end(), 0.0);
  return t;
}

double relative_error(double value, double reference) { return std::abs(value - reference) / std::abs(reference); }

CheckResult check_at_most(std::string name, double value, double threshold, std::string detail = {}) {
  return {std::move(name), value <= threshold, value, threshold, std::move(detail)};
}

CheckResult check_at_least(std::string name, double value, double threshold, std::string detail = {}) {
  return {std::move(name), value >= threshold, value, threshold, std::move(detail)};
}

Json checks_json(const std::vector<CheckResult>& checks) {
  Json arr = Json::array();
  for (const auto& c : checks) {
    Json j;
    j["name"] = c.name;
    j["passed"] = c.passed;
    j["value"] = c.value;
    j["threshold"] = c.threshold;
    if (!c.detail.empty()) j["detail"] = c.detail;
    arr.push_back(std::move(j));
  }
  return arr;
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json stats_summary(const TrialStats& stats) {
  Json j;
  const std::size_t last = stats.steps() - 1;
  j["final_mse"] = finite_or_null(stats.mse[last]);
  j["final_mean_v"] = finite_or_null(stats.mean_v[last]);
  Json ex = Json::object();
  for (std::size_t k = 0; k < stats.deltas.size(); ++k) ex[fmt_short(stats.deltas[k])] = stats.exceed[k][last];
  j["final_exceedance"] = std::move(ex);
  j["trials"] = stats.trials;
  j["diverged_trials"] = stats.diverged;
  return j;
}

// ---------------------------------------------------------------------------
// Scenarios

ExperimentResult run_dynamics(const ExperimentConfig& cfg, const std::string& hash) {
  const std::size_t d = cfg.model.dim;
  const LyapunovMetric metric = LyapunovMetric::identity(d);
  const ContractionMap map = ContractionMap::scaled_identity(cfg.dynamics.contraction, metric);
  const NoiseSchedule noise = [&] {
    switch (cfg.noise.kind) {
      case NoiseSchedule::Kind::kZero: return NoiseSchedule::zero(metric);
      case NoiseSchedule::Kind::kConstant: return NoiseSchedule::constant(cfg.noise.scale, metric);
      case NoiseSchedule::Kind::kPowerLaw: break;
    }
    return NoiseSchedule::power_law(cfg.noise.beta, cfg.noise.scale, metric);
  }();
  const Vector e0 = cfg.dynamics.e0.value_or(Vector(d, 1.0));
  const RngState base(*cfg.seed, 0);
  const TrialStats stats = run_monte_carlo(cfg.trials, cfg.deltas, base, [&](std::size_t, RngState& rng) {
    return simulate_error_dynamics(map, noise, e0, cfg.horizon, rng);
  });

  ExperimentResult r;
  r.table = table_from_stats(cfg, stats, hash);
  r.summary = stats_summary(stats);
  r.summary["noise_vanishes"] = noise.vanishing();
  const std::size_t burn_in = static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(cfg.horizon)));
  for (std::size_t k = 0; k < stats.deltas.size(); ++k) {
    const std::string tag = fmt_short(stats.deltas[k]);
    if (stats.deltas[k] >= 0.2) {
      r.checks.push_back(check_at_most("final_exceedance_delta_" + tag, stats.exceed[k].back(), 0.05));
    }
    r.checks.push_back(check_at_most("isotonic_violation_delta_" + tag,
                                     max_isotonic_violation(stats.exceed[k], burn_in), 0.02,
                                     "burn-in " + std::to_string(burn_in) + " steps"));
  }
  return r;
}

ExperimentResult run_workflow_scenario(const ExperimentConfig& cfg, const std::string& hash) {
  const ExpFamilyModel model = cfg.model.model();
  const Parameter theta = cfg.model.theta();
  const RngState base(*cfg.seed, 0);
  const bool filtered = cfg.scenario == Scenario::kWorkflowFiltered;

  std::optional<FilterHandle> filter;
  if (filtered) {
    switch (cfg.filter.kind) {
      case FilterHandle::Kind::kAllOnes: filter = FilterHandle::all_ones(); break;
      case FilterHandle::Kind::kOracle: filter = FilterHandle::oracle(cfg.filter.gamma, theta); break;
      case FilterHandle::Kind::kMlp: {
        FilterCheckpoint ckpt = load_checkpoint(cfg.filter.checkpoint);
        filter = FilterHandle::mlp(std::move(ckpt.params), std::move(ckpt.pca));
        break;
      }
      case FilterHandle::Kind::kCustom: throw ValidationError("filter.kind: custom filters are library-only");
    }
  }

  const TrialStats stats = run_monte_carlo(cfg.trials, cfg.deltas, base, [&](std::size_t k, RngState& rng) {
    WorkflowOptions opts;
    opts.initial_samples = cfg.initial_samples;
    opts.trial = k;
    if (filtered) {
      return run_workflow_filtered(model, theta, cfg.schedule, cfg.horizon, *filter, cfg.candidates_per_round, rng,
                                   opts);
    }
    return run_workflow(model, theta, cfg.schedule, cfg.horizon, rng, opts);
  });

  ExperimentResult r;
  r.table = table_from_stats(cfg, stats, hash);
  r.summary = stats_summary(stats);
  if (cfg.horizon < 2) return r;

  const auto ts = as_doubles(stats.steps());
  const double slope = trend_slope(ts, stats.mse);
  const std::size_t half = stats.steps() / 2;
  const double tail_slope =
      trend_slope(std::span(ts).subspan(half), std::span<const double>(stats.mse).subspan(half));
  r.summary["mse_slope"] = finite_or_null(slope);
  r.summary["mse_slope_last_half"] = finite_or_null(tail_slope);

  if (filtered) {
    r.summary["filter"] = filter_kind_name(filter->kind());
    if (filter->kind() != FilterHandle::Kind::kAllOnes) {
      r.checks.push_back(check_at_most("mse_trend_last_half", tail_slope, 0.0));
    }
    return r;
  }
  if (model.family() == Family::kGaussian && model.identity_covariance()) {
    // Increments are independent N(0, I/n_t), so E‖e_T‖² = d(1/n₀ + Σ 1/n_t).
    const double d = static_cast<double>(model.dim());
    double oracle = 1.0 / static_cast<double>(cfg.initial_samples.value_or(cfg.schedule.base));
    for (std::size_t t = 1; t <= cfg.horizon; ++t) oracle += 1.0 / static_cast<double>(cfg.schedule.at(t));
    oracle *= d;
    r.summary["oracle_final_mse"] = oracle;
    r.checks.push_back(check_at_most("final_mse_relative_error", relative_error(stats.mse.back(), oracle), 0.15,
                                     "oracle " + fmt_double(oracle)));
    if (cfg.schedule.kind == SampleSchedule::Kind::kConstant) {
      const double expected = d / static_cast<double>(cfg.schedule.base);
      r.summary["oracle_mse_slope"] = expected;
      r.checks.push_back(check_at_most("mse_slope_relative_error", relative_error(slope, expected), 0.15,
                                       "oracle " + fmt_double(expected)));
    }
  }
  return r;
}

ExperimentResult run_rates(const ExperimentConfig& cfg, const std::string& hash) {
  const RatesSpec& rs = cfg.rates;
  const RegulatorFn f = RegulatorFn::power_law(rs.p, rs.c1);
  const auto bounds = power_law_bounds(rs.steps, rs.beta, rs.noise_scale);
  const auto x = recurrence_simulate(f, rs.x0, bounds, rs.steps);

  ExperimentResult r;
  ResultTable table{std::string(scenario_name(cfg.scenario)), cfg.deltas, {}, hash};
  for (std::size_t t = 0; t <= rs.steps; ++t) {
    if (t % cfg.record_stride != 0 && t != rs.steps) continue;
    ResultRow row{t, 0, x[t], x[t], {}, 1};
    for (double d : cfg.deltas) row.exceed.push_back(x[t] > d * d ? 1.0 : 0.0);
    table.rows.push_back(std::move(row));
  }
  r.table = std::move(table);

  const double predicted = predicted_decay_exponent(rs.p, rs.beta);
  const DecayFit tail = fit_decay_rate(x, rs.tail_fraction);
  r.summary["predicted_slope"] = predicted;
  r.summary["fitted_slope"] = tail.slope;
  r.summary["r_squared"] = tail.r_squared;
  r.summary["final_value"] = x.back();
  r.checks.push_back(check_at_most("tail_slope_abs_error", std::abs(tail.slope - predicted), 0.1,
                                   "predicted " + fmt_double(predicted)));
  if (rs.p == 1.0) {
    // Geometric phase: until the state comes within 10x of the b_t / c1 floor.
    std::size_t end = 0;
    while (end < rs.steps && x[end] > 10.0 * bounds[end] / rs.c1) ++end;
    r.summary["geometric_phase_steps"] = end;
    if (end >= 3) {
      const DecayFit geo = fit_exponential_rate(x, 0, end);
      const double expected = std::log(1.0 - rs.c1);
      r.summary["geometric_rate"] = geo.slope;
      r.summary["expected_geometric_rate"] = expected;
      r.checks.push_back(check_at_most("geometric_rate_relative_error", relative_error(geo.slope, expected), 0.1));
    } else {
      r.checks.push_back({"geometric_phase_present", false, static_cast<double>(end), 3.0,
                          "start x0 higher to observe the geometric phase"});
    }
  }
  return r;
}

// P(‖Z‖² ≥ nδ²) for Z ~ N(0, I_d); closed forms for d = 1, 2.
std::optional<double> gaussian_tail(std::size_t d, std::size_t n, double delta) {
  const double x = static_cast<double>(n) * delta * delta;
  if (d == 1) return std::erfc(std::sqrt(x / 2.0));
  if (d == 2) return std::exp(-x / 2.0);
  return std::nullopt;
}

ExperimentResult run_concentration(const ExperimentConfig& cfg, const std::string& hash) {
  const ExpFamilyModel model = cfg.model.model();
  const Parameter theta = cfg.model.theta();
  const RngState base(*cfg.seed, 0);
  const auto& sizes = cfg.concentration.sizes;

  const auto curve = measure_concentration(model, theta, sizes, cfg.concentration.delta, cfg.trials, base);

  // Per-size error moments on the same streams, for the table.
  ResultTable table{std::string(scenario_name(cfg.scenario)), cfg.deltas, {}, hash};
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    const RngState size_rng = base.substream(j);
    std::vector<double> sq(cfg.trials);
    parallel_for(cfg.trials, [&](std::size_t k) {
      RngState rng = size_rng.substream(k);
      sq[k] = squared_norm(estimate(model, sample(model, theta, sizes[j], rng)).theta - theta.theta);
    });
    ResultRow row{sizes[j], sizes[j], 0.0, 0.0, std::vector<double>(cfg.deltas.size(), 0.0), cfg.trials};
    for (double s : sq) {
      row.mse += s;
      for (std::size_t k = 0; k < cfg.deltas.size(); ++k)
        if (std::sqrt(s) >= cfg.deltas[k]) row.exceed[k] += 1.0;
    }
    const double inv = 1.0 / static_cast<double>(cfg.trials);
    row.mse *= inv;
    row.mean_v = row.mse;
    for (double& e : row.exceed) e *= inv;
    table.rows.push_back(std::move(row));
  }

  ExperimentResult r;
  r.table = std::move(table);
  Json pts = Json::array();
  std::vector<double> ex;
  for (const auto& p : curve) {
    pts.push_back({{"n", p.n}, {"exceedance", p.exceedance}});
    ex.push_back(p.exceedance);
  }
  r.summary["delta"] = cfg.concentration.delta;
  r.summary["curve"] = std::move(pts);
  r.checks.push_back(check_at_most("monotone_in_n_violation", max_isotonic_violation(ex, 0), 0.0));
  if (model.family() == Family::kGaussian && model.identity_covariance()) {
    for (const auto& p : curve) {
      const auto oracle = gaussian_tail(model.dim(), p.n, cfg.concentration.delta);
      if (!oracle) break;
      const double se = std::sqrt(*oracle * (1.0 - *oracle) / static_cast<double>(cfg.trials));
      const double tol = std::max(0.002, 4.0 * se);
      r.checks.push_back(check_at_most("tail_oracle_abs_error_n_" + std::to_string(p.n),
                                       std::abs(p.exceedance - *oracle), tol, "oracle " + fmt_double(*oracle)));
    }
  }
  return r;
}

ExperimentResult run_train_filter(const ExperimentConfig& cfg) {
  const ExpFamilyModel model = cfg.model.model();
  const Parameter theta = cfg.model.theta();
  const RngState base(*cfg.seed, 0);
  const TrainSpec& ts = cfg.train;

  RngState train_rng = base.substream(1);
  RngState holdout_rng = base.substream(2);
  RngState init_rng = base.substream(3);
  LabeledDataset train = merge(
      simulate_drift_training_data(model, theta, ts.rounds, cfg.candidates_per_round, ts.contamination, train_rng)
          .rounds);
  LabeledDataset holdout = merge(simulate_drift_training_data(model, theta, ts.holdout_rounds,
                                                              cfg.candidates_per_round, ts.contamination, holdout_rng)
                                     .rounds);
  const std::size_t k = ts.pca_k > 0 ? ts.pca_k : std::min<std::size_t>(model.dim(), 8);
  const PcaTransform pca = fit_pca(train.points, k);
  apply_features(train, pca);
  apply_features(holdout, pca);

  TrainConfig tc = ts.config;
  if (ts.oracle_reference) tc.theta_good_override = theta.theta;
  const TrainResult result = train_filter(model, train, tc, init_rng);
  const LyapunovMetric metric = tc.lyapunov(model.dim());
  const ContractionCertificate cert =
      verify_contraction(result.params, train, model, result.anchors, tc.contraction, metric);
  const double train_acc = classification_accuracy(result.params, train);
  const double holdout_acc = classification_accuracy(result.params, holdout);

  ExperimentResult r;
  r.summary["train_points"] = train.size();
  r.summary["holdout_points"] = holdout.size();
  r.summary["pca_components"] = k;
  r.summary["oracle_reference"] = result.anchors.oracle_reference;
  r.summary["final_loss"] = {{"total", result.final_loss.total},
                             {"classification", result.final_loss.classification},
                             {"contraction", result.final_loss.contraction},
                             {"ess", result.final_loss.ess}};
  r.summary["train_accuracy"] = train_acc;
  r.summary["holdout_accuracy"] = holdout_acc;
  r.summary["certificate"] = {{"v_new", cert.v_new}, {"bound", cert.bound}, {"holds", cert.holds}};
  r.summary["config_hash"] = train_config_hash(tc);

  r.checks.push_back(check_at_most("final_contraction_loss", result.final_loss.contraction, 1e-6));
  r.checks.push_back(check_at_least("holdout_accuracy", holdout_acc, 0.90));
  r.checks.push_back({"contraction_certificate", cert.holds, cert.v_new, cert.bound, "V(e_new) <= (1 - c) V(e_est)"});

  r.extra_files["filter.json"] = serialize_checkpoint({pca, result.params, tc, {}});
  std::string log = "epoch,total,classification,contraction,ess\n";
  for (const auto& e : result.log) {
    log += std::to_string(e.epoch) + "," + fmt_double(e.loss.total) + "," + fmt_double(e.loss.classification) + "," +
           fmt_double(e.loss.contraction) + "," + fmt_double(e.loss.ess) + "\n";
  }
  r.extra_files["training_log.csv"] = std::move(log);
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

std::string_view scenario_name(Scenario s) noexcept {
  switch (s) {
    case Scenario::kDynamics: return "dynamics";
    case Scenario::kWorkflow: return "workflow";
    case Scenario::kWorkflowFiltered: return "workflow-filtered";
    case Scenario::kRates: return "rates";
    case Scenario::kConcentration: return "concentration";
    case Scenario::kTrainFilter: return "train-filter";
  }
  return "unknown";
}

Scenario parse_scenario(std::string_view name) {
  for (Scenario s : {Scenario::kDynamics, Scenario::kWorkflow, Scenario::kWorkflowFiltered, Scenario::kRates,
                     Scenario::kConcentration, Scenario::kTrainFilter}) {
    if (scenario_name(s) == name) return s;
  }
  throw ValidationError("scenario: unknown value '" + std::string(name) + "'");
}

ExpFamilyModel ModelSpec::model() const { return ExpFamilyModel::make(family, dim); }

Parameter ModelSpec::theta() const { return Parameter{theta_star.value_or(Vector(dim, 1.0))}; }

void ExperimentConfig::validate() const {
  if (!seed) throw ValidationError("seed: required (set it in the config or pass --seed)");
  if (model.dim == 0) throw ValidationError("model.dim: must be >= 1");
  if (model.theta_star && model.theta_star->dim() != model.dim) {
    throw ValidationError("model.theta_star: expected " + std::to_string(model.dim) + " entries");
  }
  if (trials == 0) throw ValidationError("trials: must be >= 1");
  if (record_stride == 0) throw ValidationError("record_stride: must be >= 1");
  if (deltas.empty()) throw ValidationError("deltas: need at least one threshold");
  for (double d : deltas)
    if (!(d > 0.0) || !std::isfinite(d)) throw ValidationError("deltas: thresholds must be finite and > 0");
  schedule.validate();
  if (initial_samples && *initial_samples == 0) throw ValidationError("schedule.initial_samples: must be >= 1");

  switch (scenario) {
    case Scenario::kDynamics:
      if (horizon == 0) throw ValidationError("horizon: must be >= 1");
      if (dynamics.e0 && dynamics.e0->dim() != model.dim) {
        throw ValidationError("dynamics.e0: expected " + std::to_string(model.dim) + " entries");
      }
      if (noise.kind == NoiseSchedule::Kind::kPowerLaw && !(noise.beta > 0.0)) {
        throw ValidationError("noise.beta: must be > 0");
      }
      if (!(noise.scale >= 0.0)) throw ValidationError("noise.scale: must be >= 0");
      break;
    case Scenario::kWorkflowFiltered:
      if (filter.kind == FilterHandle::Kind::kOracle && !(filter.gamma > 0.0 && filter.gamma <= 1.0)) {
        throw ValidationError("filter.gamma: must be in (0, 1]");
      }
      if (filter.kind == FilterHandle::Kind::kMlp && filter.checkpoint.empty()) {
        throw ValidationError("filter.checkpoint: required for the mlp filter");
      }
      break;
    case Scenario::kRates:
      if (!(rates.p >= 1.0)) throw ValidationError("rates.p: must be >= 1");
      if (!(rates.beta > 0.0)) throw ValidationError("rates.beta: must be > 0");
      if (!(rates.c1 > 0.0)) throw ValidationError("rates.c1: must be > 0");
      if (rates.p == 1.0 && !(rates.c1 < 1.0)) throw ValidationError("rates.c1: must be < 1 when p = 1");
      if (!(rates.x0 >= 0.0)) throw ValidationError("rates.x0: must be >= 0");
      if (!(rates.noise_scale > 0.0)) throw ValidationError("rates.noise_scale: must be > 0");
      if (!(rates.tail_fraction > 0.0 && rates.tail_fraction < 1.0)) {
        throw ValidationError("rates.tail_fraction: must be in (0, 1)");
      }
      if (rates.steps < 10) throw ValidationError("rates.steps: must be >= 10");
      break;
    case Scenario::kConcentration:
      if (trials < 100) throw ValidationError("trials: concentration needs at least 100");
      if (concentration.sizes.empty()) throw ValidationError("concentration.sizes: need at least one size");
      for (auto n : concentration.sizes)
        if (n == 0) throw ValidationError("concentration.sizes: sizes must be >= 1");
      if (!(concentration.delta >= 0.0)) throw ValidationError("concentration.delta: must be >= 0");
      break;
    case Scenario::kTrainFilter:
      if (train.rounds == 0) throw ValidationError("train.rounds: must be >= 1");
      if (train.holdout_rounds == 0) throw ValidationError("train.holdout_rounds: must be >= 1");
      if (!(train.contamination > 0.0 && train.contamination < 1.0)) {
        throw ValidationError("train.contamination: must be in (0, 1)");
      }
      if (train.pca_k > model.dim) throw ValidationError("train.pca_k: exceeds model.dim");
      if (candidates_per_round == 0) throw ValidationError("candidates_per_round: must be >= 1");
      train.config.validate();
      break;
    case Scenario::kWorkflow: break;
  }
}

Json to_json(const ExperimentConfig& c, bool include_out) {
  Json j;
  j["scenario"] = scenario_name(c.scenario);
  j["seed"] = c.seed ? Json(*c.seed) : Json(nullptr);
  j["horizon"] = c.horizon;
  j["trials"] = c.trials;
  j["deltas"] = c.deltas;
  j["candidates_per_round"] = c.candidates_per_round;
  j["record_stride"] = c.record_stride;
  if (include_out) j["out"] = c.out;
  j["model"] = {{"family", family_name(c.model.family)}, {"dim", c.model.dim},
                {"theta_star", optional_json(c.model.theta_star)}};
  j["schedule"] = {{"kind", c.schedule.kind == SampleSchedule::Kind::kConstant ? "constant" : "power"},
                   {"base", c.schedule.base},
                   {"exponent", c.schedule.exponent},
                   {"initial_samples", c.initial_samples ? Json(*c.initial_samples) : Json(nullptr)}};
  j["noise"] = {{"kind", noise_kind_name(c.noise.kind)}, {"beta", c.noise.beta}, {"scale", c.noise.scale}};
  j["dynamics"] = {{"contraction", to_json(c.dynamics.contraction)}, {"e0", optional_json(c.dynamics.e0)}};
  j["filter"] = {{"kind", filter_kind_name(c.filter.kind)}, {"gamma", c.filter.gamma},
                 {"checkpoint", c.filter.checkpoint}};
  j["rates"] = {{"p", c.rates.p},
                {"beta", c.rates.beta},
                {"c1", c.rates.c1},
                {"x0", c.rates.x0},
                {"noise_scale", c.rates.noise_scale},
                {"tail_fraction", c.rates.tail_fraction},
                {"steps", c.rates.steps}};
  j["concentration"] = {{"sizes", c.concentration.sizes}, {"delta", c.concentration.delta}};
  j["train"] = {{"rounds", c.train.rounds},
                {"holdout_rounds", c.train.holdout_rounds},
                {"contamination", c.train.contamination},
                {"pca_k", c.train.pca_k},
                {"oracle_reference", c.train.oracle_reference},
                {"network", to_json(c.train.config)}};
  return j;
}

ExperimentConfig parse_config(const Json& user) {
  if (!user.is_object()) throw ValidationError("config: top level must be an object");
  const Json defaults = to_json(ExperimentConfig{});
  reject_unknown(user, defaults, "");
  Json j = defaults;
  j.merge_patch(user);

  ExperimentConfig c;
  c.scenario = parse_scenario(get_string(j, "scenario", ""));
  if (const auto it = j.find("seed"); it != j.end() && !it->is_null()) {
    if (!it->is_number_unsigned()) throw ValidationError("config field 'seed' must be a nonnegative integer");
    c.seed = it->get<std::uint64_t>();
  }
  c.horizon = get_count(j, "horizon", "");
  c.trials = get_count(j, "trials", "");
  c.deltas = vector_from_json(at(j, "deltas", ""), "deltas").values();
  c.candidates_per_round = get_count(j, "candidates_per_round", "");
  c.record_stride = get_count(j, "record_stride", "");
  c.out = get_string(j, "out", "");

  const Json& m = at(j, "model", "");
  c.model.family = parse_family(get_string(m, "family", "model."));
  c.model.dim = get_count(m, "dim", "model.");
  c.model.theta_star = get_optional_vector(m, "theta_star", "model.");

  const Json& s = at(j, "schedule", "");
  const std::string kind = get_string(s, "kind", "schedule.");
  if (kind != "constant" && kind != "power") {
    throw ValidationError("schedule.kind: unknown value '" + kind + "' (expected constant or power)");
  }
  c.schedule.kind = kind == "constant" ? SampleSchedule::Kind::kConstant : SampleSchedule::Kind::kPower;
  c.schedule.base = get_count(s, "base", "schedule.");
  c.schedule.exponent = get_number(s, "exponent", "schedule.");
  if (const auto it = s.find("initial_samples"); it != s.end() && !it->is_null()) {
    c.initial_samples = get_count(s, "initial_samples", "schedule.");
  }

  const Json& nz = at(j, "noise", "");
  c.noise.kind = parse_noise_kind(get_string(nz, "kind", "noise."));
  c.noise.beta = get_number(nz, "beta", "noise.");
  c.noise.scale = get_number(nz, "scale", "noise.");

  const Json& dy = at(j, "dynamics", "");
  try {
    c.dynamics.contraction = contraction_from_json(at(dy, "contraction", "dynamics."));
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("dynamics.contraction: ") + e.what());
  }
  c.dynamics.e0 = get_optional_vector(dy, "e0", "dynamics.");

  const Json& fl = at(j, "filter", "");
  c.filter.kind = parse_filter_kind(get_string(fl, "kind", "filter."));
  c.filter.gamma = get_number(fl, "gamma", "filter.");
  c.filter.checkpoint = get_string(fl, "checkpoint", "filter.");

  const Json& rt = at(j, "rates", "");
  c.rates.p = get_number(rt, "p", "rates.");
  c.rates.beta = get_number(rt, "beta", "rates.");
  c.rates.c1 = get_number(rt, "c1", "rates.");
  c.rates.x0 = get_number(rt, "x0", "rates.");
  c.rates.noise_scale = get_number(rt, "noise_scale", "rates.");
  c.rates.tail_fraction = get_number(rt, "tail_fraction", "rates.");
  c.rates.steps = get_count(rt, "steps", "rates.");

  const Json& cc = at(j, "concentration", "");
  c.concentration.sizes.clear();
  const Json& sizes = at(cc, "sizes", "concentration.");
  if (!sizes.is_array()) throw ValidationError("config field 'concentration.sizes' must be an array");
  for (const auto& n : sizes) {
    if (!n.is_number_unsigned()) throw ValidationError("concentration.sizes: entries must be nonnegative integers");
    c.concentration.sizes.push_back(n.get<std::size_t>());
  }
  c.concentration.delta = get_number(cc, "delta", "concentration.");

  const Json& tr = at(j, "train", "");
  c.train.rounds = get_count(tr, "rounds", "train.");
  c.train.holdout_rounds = get_count(tr, "holdout_rounds", "train.");
  c.train.contamination = get_number(tr, "contamination", "train.");
  c.train.pca_k = get_count(tr, "pca_k", "train.");
  c.train.oracle_reference = get_bool(tr, "oracle_reference", "train.");
  try {
    c.train.config = train_config_from_json(at(tr, "network", "train."));
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("train.network: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("train.network: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": malformed JSON: " + e.what());
  }
  ExperimentConfig c = parse_config(j);
  if (!c.filter.checkpoint.empty() && std::filesystem::path(c.filter.checkpoint).is_relative()) {
    c.filter.checkpoint = (path.parent_path() / c.filter.checkpoint).lexically_normal().string();
  }
  return c;
}

std::string config_hash(const ExperimentConfig& config) { return git_blob_sha1(to_json(config, false).dump()); }

// ---------------------------------------------------------------------------
// CSV

std::string write_csv(const ResultTable& table) {
  std::string out = "# schema=" + std::to_string(kCsvSchemaVersion) + "\n";
  out += "scenario,t,n_t,mse,mean_V";
  for (double d : table.deltas) out += ",exceed_" + fmt_short(d);
  out += ",trials,config_hash\n";
  for (const auto& r : table.rows) {
    if (r.exceed.size() != table.deltas.size()) throw ValidationError("write_csv: row threshold count mismatch");
    out += table.scenario + "," + std::to_string(r.t) + "," + std::to_string(r.n_t) + "," + fmt_double(r.mse) + "," +
           fmt_double(r.mean_v);
    for (double e : r.exceed) out += "," + fmt_double(e);
    out += "," + std::to_string(r.trials) + "," + table.config_hash + "\n";
  }
  return out;
}

ResultTable parse_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "# schema=" + std::to_string(kCsvSchemaVersion)) {
    throw ValidationError("csv: missing or unsupported schema line");
  }
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : s) {
      if (ch == ',') {
        parts.push_back(cur);
        cur.clear();
      } else if (ch != '\r') {
        cur.push_back(ch);
      }
    }
    parts.push_back(cur);
    return parts;
  };
  if (!std::getline(in, line)) throw ValidationError("csv: missing header");
  const auto header = split(line);
  if (header.size() < 7 || header[0] != "scenario" || header[1] != "t" || header[2] != "n_t" || header[3] != "mse" ||
      header[4] != "mean_V" || header[header.size() - 2] != "trials" || header.back() != "config_hash") {
    throw ValidationError("csv: unexpected header");
  }
  ResultTable table;
  for (std::size_t k = 5; k + 2 < header.size(); ++k) {
    if (header[k].rfind("exceed_", 0) != 0) throw ValidationError("csv: unexpected column " + header[k]);
    table.deltas.push_back(std::strtod(header[k].c_str() + 7, nullptr));
  }
  auto to_double = [](const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0') throw ValidationError("csv: bad number '" + s + "'");
    return v;
  };
  auto to_count = [](const std::string& s) {
    char* end = nullptr;
    const auto v = std::strtoull(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0') throw ValidationError("csv: bad integer '" + s + "'");
    return static_cast<std::size_t>(v);
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != header.size()) throw ValidationError("csv: ragged row");
    if (table.rows.empty()) {
      table.scenario = f[0];
      table.config_hash = f.back();
    }
    ResultRow r{to_count(f[1]), to_count(f[2]), to_double(f[3]), to_double(f[4]), {}, to_count(f[f.size() - 2])};
    for (std::size_t k = 5; k + 2 < f.size(); ++k) r.exceed.push_back(to_double(f[k]));
    table.rows.push_back(std::move(r));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Running

bool ExperimentResult::all_passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::string hash = config_hash(config);
  ExperimentResult r;
  try {
    switch (config.scenario) {
      case Scenario::kDynamics: r = run_dynamics(config, hash); break;
      case Scenario::kWorkflow:
      case Scenario::kWorkflowFiltered: r = run_workflow_scenario(config, hash); break;
      case Scenario::kRates: r = run_rates(config, hash); break;
      case Scenario::kConcentration: r = run_concentration(config, hash); break;
      case Scenario::kTrainFilter: r = run_train_filter(config); break;
    }
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    throw Error("scenario " + std::string(scenario_name(config.scenario)) + ": " + e.what());
  }
  Json summary;
  summary["scenario"] = scenario_name(config.scenario);
  summary["seed"] = *config.seed;
  summary["config_hash"] = hash;
  for (auto& [key, value] : r.summary.items()) summary[key] = value;
  summary["checks"] = checks_json(r.checks);
  summary["all_checks_passed"] = r.all_passed();
  r.summary = std::move(summary);
  return r;
}

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  if (result.table) write_file_atomic(dir / "results.csv", write_csv(*result.table));
  write_file_atomic(dir / "summary.json", result.summary.dump(2) + "\n");
  for (const auto& [name, content] : result.extra_files) write_file_atomic(dir / name, content);
}

double trend_slope(std::span<const double> t, std::span<const double> y) { return fit_line(t, y).slope; }

double max_isotonic_violation(std::span<const double> series, std::size_t begin) {
  if (begin >= series.size()) return 0.0;
  // Pool-adjacent-violators for the nonincreasing least-squares fit.
  struct Block {
    double mean;
    std::size_t count;
  };
  std::vector<Block> blocks;
  for (std::size_t i = begin; i < series.size(); ++i) {
    blocks.push_back({series[i], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean < blocks.back().mean) {
      const Block b = blocks.back();
      blocks.pop_back();
      Block& a = blocks.back();
      a.mean = (a.mean * static_cast<double>(a.count) + b.mean * static_cast<double>(b.count)) /
               static_cast<double>(a.count + b.count);
      a.count += b.count;
    }
  }
  double worst = 0.0;
  std::size_t i = begin;
  for (const Block& b : blocks) {
    for (std::size_t k = 0; k < b.count; ++k, ++i) worst = std::max(worst, std::abs(series[i] - b.mean));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Comparison and plots

Comparison compare_runs(const ResultTable& baseline, const ResultTable& treatment) {
  if (baseline.rows.size() != treatment.rows.size()) {
    throw ValidationError("compare: tables have " + std::to_string(baseline.rows.size()) + " and " +
                          std::to_string(treatment.rows.size()) + " rows");
  }
  if (baseline.deltas != treatment.deltas) throw ValidationError("compare: exceedance thresholds differ");
  if (baseline.rows.empty()) throw ValidationError("compare: empty tables");
  Comparison c;
  std::vector<double> ts, ratios;
  for (std::size_t i = 0; i < baseline.rows.size(); ++i) {
    const auto& b = baseline.rows[i];
    const auto& t = treatment.rows[i];
    if (b.t != t.t) throw ValidationError("compare: step grids differ at row " + std::to_string(i));
    const double ratio = t.mse > 0.0 ? b.mse / t.mse : std::numeric_limits<double>::infinity();
    c.rows.push_back({b.t, b.mse, t.mse, ratio});
    if (std::isfinite(ratio)) {
      ts.push_back(static_cast<double>(b.t));
      ratios.push_back(ratio);
    }
  }
  c.final_ratio = c.rows.back().ratio;
  c.ratio_slope = ts.size() >= 2 ? trend_slope(ts, ratios) : 0.0;
  c.increasing = c.ratio_slope > 0.0;
  return c;
}

std::string Comparison::csv() const {
  std::string out = "# schema=" + std::to_string(kCsvSchemaVersion) + "\n";
  out += "t,baseline_mse,treatment_mse,ratio\n";
  for (const auto& r : rows) {
    out += std::to_string(r.t) + "," + fmt_double(r.baseline_mse) + "," + fmt_double(r.treatment_mse) + "," +
           fmt_double(r.ratio) + "\n";
  }
  return out;
}

Json Comparison::summary() const {
  Json j;
  j["rows"] = rows.size();
  j["final_ratio"] = finite_or_null(final_ratio);
  j["ratio_slope"] = ratio_slope;
  j["ratio_increasing"] = increasing;
  return j;
}

PlotKind parse_plot_kind(std::string_view name) {
  if (name == "linear") return PlotKind::kLinear;
  if (name == "log") return PlotKind::kLog;
  throw ValidationError("plot kind: unknown value '" + std::string(name) + "' (expected linear or log)");
}

std::string emit_plot(const ResultTable& table, PlotKind kind) {
  if (table.rows.empty()) throw ValidationError("plot: empty series");
  constexpr double kWidth = 640, kHeight = 400, kLeft = 70, kRight = 20, kTop = 30, kBottom = 50;
  const bool log_y = kind == PlotKind::kLog;

  double min_pos = std::numeric_limits<double>::infinity();
  for (const auto& r : table.rows)
    if (r.mse > 0.0 && std::isfinite(r.mse)) min_pos = std::min(min_pos, r.mse);
  if (!std::isfinite(min_pos)) min_pos = 1.0;
  auto y_of = [&](double v) {
    if (!std::isfinite(v)) v = std::numeric_limits<double>::max();
    return log_y ? std::log10(std::max(v, min_pos)) : v;
  };

  double x_lo = static_cast<double>(table.rows.front().t), x_hi = x_lo;
  double y_lo = y_of(table.rows.front().mse), y_hi = y_lo;
  for (const auto& r : table.rows) {
    x_lo = std::min(x_lo, static_cast<double>(r.t));
    x_hi = std::max(x_hi, static_cast<double>(r.t));
    y_lo = std::min(y_lo, y_of(r.mse));
    y_hi = std::max(y_hi, y_of(r.mse));
  }
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  if (y_hi == y_lo) y_hi = y_lo + 1.0;
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;

  char buf[128];
  std::string svg;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                kWidth, kHeight, kWidth, kHeight);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<rect x=\"%.0f\" y=\"%.0f\" width=\"%.0f\" height=\"%.0f\" fill=\"none\" stroke=\"black\"/>\n",
                kLeft, kTop, pw, ph);
  svg += buf;
  svg += "<text x=\"" + fmt_short(kLeft) + "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" + table.scenario +
         (log_y ? " (log MSE)" : " (MSE)") + "</text>\n";
  auto label = [&](double x, double y, const std::string& text, const char* anchor) {
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"%s\">",
                  x, y, anchor);
    svg += buf + text + "</text>\n";
  };
  auto y_text = [&](double y) { return fmt_short(log_y ? std::pow(10.0, y) : y); };
  label(kLeft, kHeight - kBottom + 16, fmt_short(x_lo), "start");
  label(kWidth - kRight, kHeight - kBottom + 16, fmt_short(x_hi), "end");
  label(kLeft + pw / 2, kHeight - 12, "t", "middle");
  label(kLeft - 6, kTop + ph, y_text(y_lo), "end");
  label(kLeft - 6, kTop + 10, y_text(y_hi), "end");

  svg += "<polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const double px = kLeft + (static_cast<double>(table.rows[i].t) - x_lo) / (x_hi - x_lo) * pw;
    const double py = kTop + ph - (y_of(table.rows[i].mse) - y_lo) / (y_hi - y_lo) * ph;
    std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i == 0 ? "" : " ", px, py);
    svg += buf;
  }
  svg += "\"/>\n</svg>\n";
  return svg;
}

}  // namespace mcf
