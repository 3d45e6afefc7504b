// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcf/contraction.hpp"
#include "mcf/dynamics.hpp"
#include "mcf/expfam.hpp"
#include "mcf/filter.hpp"
#include "mcf/mlp.hpp"
#include "mcf/serialize.hpp"

namespace mcf {

inline constexpr int kCsvSchemaVersion = 1;

enum class Scenario { kDynamics, kWorkflow, kWorkflowFiltered, kRates, kConcentration, kTrainFilter };

std::string_view scenario_name(Scenario s) noexcept;
Scenario parse_scenario(std::string_view name);

struct ModelSpec {
  Family family = Family::kGaussian;
  std::size_t dim = 2;
  std::optional<Vector> theta_star;  // all ones when unset

  ExpFamilyModel model() const;
  Parameter theta() const;
};

struct NoiseSpec {
  NoiseSchedule::Kind kind = NoiseSchedule::Kind::kPowerLaw;
  double beta = 1.0;
  double scale = 1.0;
};

struct DynamicsSpec {
  ContractionFn contraction = ContractionFn::example_sqrt();
  std::optional<Vector> e0;  // all ones when unset
};

struct FilterSpec {
  FilterHandle::Kind kind = FilterHandle::Kind::kOracle;
  double gamma = 0.5;
  std::string checkpoint;  // mlp only
};

struct RatesSpec {
  double p = 2.0;
  double beta = 1.0;
  double c1 = 1.0;
  double x0 = 1.0;
  double noise_scale = 1.0;
  double tail_fraction = 0.9;
  std::size_t steps = 1'000'000;
};

struct ConcentrationSpec {
  std::vector<std::size_t> sizes{1, 10, 100};
  double delta = 3.0;
};

struct TrainSpec {
  std::size_t rounds = 5;
  std::size_t holdout_rounds = 2;
  double contamination = 0.3;
  std::size_t pca_k = 0;  // 0 = min(dim, 8)
  bool oracle_reference = false;
  TrainConfig config;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::kWorkflow;
  ModelSpec model;
  SampleSchedule schedule = SampleSchedule::constant(100);
  std::optional<std::size_t> initial_samples;
  NoiseSpec noise;
  DynamicsSpec dynamics;
  FilterSpec filter;
  RatesSpec rates;
  ConcentrationSpec concentration;
  TrainSpec train;
  std::size_t horizon = 400;
  std::size_t trials = 100;
  std::vector<double> deltas{0.1, 0.2, 0.5};
  std::optional<std::uint64_t> seed;
  std::size_t candidates_per_round = 1000;
  std::size_t record_stride = 1;
  std::string out = "out";

  /// Throws ValidationError naming the offending field.
  void validate() const;
};

/// Missing keys take defaults; unknown keys are rejected.
ExperimentConfig parse_config(const Json& j);
Json to_json(const ExperimentConfig& config, bool include_out = true);
/// Relative checkpoint paths resolve against the config file's directory.
ExperimentConfig load_config(const std::filesystem::path& path);

/// git_blob_sha1 of the serialized config, excluding the output directory.
std::string config_hash(const ExperimentConfig& config);

struct ResultRow {
  std::size_t t = 0;
  std::size_t n_t = 0;
  double mse = 0.0;
  double mean_v = 0.0;
  std::vector<double> exceed;
  std::size_t trials = 0;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct ResultTable {
  std::string scenario;
  std::vector<double> deltas;
  std::vector<ResultRow> rows;
  std::string config_hash;
};

std::string write_csv(const ResultTable& table);
ResultTable parse_csv(std::string_view text);

/// One named acceptance check.
struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct ExperimentResult {
  std::optional<ResultTable> table;
  Json summary;
  std::vector<CheckResult> checks;
  std::map<std::string, std::string> extra_files;  // file name -> content

  bool all_passed() const noexcept;
};

/// Runs the configured scenario. Runtime failures are rethrown as Error
/// with the scenario name prepended.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes results.csv (when present), summary.json and extra files into dir.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

/// Slope of the least-squares line through (t, y).
double trend_slope(std::span<const double> t, std::span<const double> y);

/// Largest absolute residual of series[begin..] from its nonincreasing
/// least-squares fit. Zero for a nonincreasing series.
double max_isotonic_violation(std::span<const double> series, std::size_t begin);

struct ComparisonRow {
  std::size_t t;
  double baseline_mse;
  double treatment_mse;
  double ratio;
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  double final_ratio = 0.0;
  double ratio_slope = 0.0;
  bool increasing = false;

  std::string csv() const;
  Json summary() const;
};

/// Per-step baseline/treatment MSE ratio. Rejects tables whose step grids
/// or thresholds differ.
Comparison compare_runs(const ResultTable& baseline, const ResultTable& treatment);

enum class PlotKind { kLinear, kLog };
PlotKind parse_plot_kind(std::string_view name);

/// SVG line plot of MSE against t, one vertex per row. Log kind uses a
/// log-scaled y axis.
std::string emit_plot(const ResultTable& table, PlotKind kind);

}  // namespace mcf
