// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "mcf/errors.hpp"
#include "mcf/experiment.hpp"
#include "support.hpp"

namespace mcf {
namespace {

using testing::Gen;

ExperimentConfig small_workflow(std::uint64_t seed) {
  ExperimentConfig c;
  c.scenario = Scenario::kWorkflow;
  c.model.dim = 1;
  c.horizon = 20;
  c.trials = 16;
  c.seed = seed;
  return c;
}

std::size_t count(const std::string& s, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

// --- Config ------------------------------------------------------------------

TEST(ParseConfig, RoundTrip) {
  const Json in = Json::parse(R"({
    "scenario": "workflow-filtered", "seed": 11, "horizon": 50, "trials": 8,
    "model": {"family": "poisson", "dim": 3, "theta_star": [0.1, 0.2, 0.3]},
    "schedule": {"kind": "power", "base": 20, "exponent": 1.5},
    "filter": {"kind": "oracle", "gamma": 0.25},
    "deltas": [0.3, 0.05]
  })");
  const ExperimentConfig c = parse_config(in);
  EXPECT_EQ(c.scenario, Scenario::kWorkflowFiltered);
  EXPECT_EQ(c.model.family, Family::kPoisson);
  EXPECT_EQ(*c.seed, 11u);
  EXPECT_EQ(c.filter.gamma, 0.25);
  EXPECT_EQ(c.trials, 8u);
  EXPECT_EQ(c.candidates_per_round, 1000u);
  const Json out = to_json(c);
  EXPECT_EQ(to_json(parse_config(out)), out);
  EXPECT_EQ(config_hash(parse_config(out)), config_hash(c));
}

TEST(ParseConfig, HashIgnoresOutputDirectory) {
  ExperimentConfig a = small_workflow(1), b = small_workflow(1);
  b.out = "elsewhere";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.seed = 2;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(ParseConfig, RejectsUnknownKeysAtAnyDepth) {
  EXPECT_THROW(parse_config(Json::parse(R"({"seed": 1, "horizn": 5})")), ValidationError);
  EXPECT_THROW(parse_config(Json::parse(R"({"seed": 1, "model": {"dims": 2}})")), ValidationError);
  EXPECT_THROW(parse_config(Json::parse(R"({"seed": 1, "train": {"network": {"lr": 1}}})")), ValidationError);
}

TEST(ParseConfig, RejectsMalformedFields) {
  EXPECT_THROW(parse_config(Json::parse(R"({"seed": 1, "scenario": "nope"})")), ValidationError);
  EXPECT_THROW(parse_config(Json::parse(R"({"seed": 1, "horizon": "five"})")), ValidationError);
  EXPECT_THROW(parse_config(Json::parse(R"({"seed": -1})")), ValidationError);
}

TEST(ValidateConfig, RejectsMissingSeedAndBadValues) {
  // Parsing leaves the seed open so the command line can supply it.
  EXPECT_THROW(parse_config(Json::parse(R"({"horizon": 5})")).validate(), ValidationError);
  EXPECT_THROW(parse_config(Json::parse(R"({"seed": 1, "trials": 0})")).validate(), ValidationError);
  EXPECT_THROW(parse_config(Json::parse(R"({"seed": 1, "deltas": [-0.1]})")).validate(), ValidationError);
  EXPECT_THROW(parse_config(Json::parse(R"({"seed": 1, "model": {"dim": 2, "theta_star": [1]}})")).validate(),
               ValidationError);
  EXPECT_NO_THROW(parse_config(Json::parse(R"({"seed": 1})")).validate());
}

TEST(LoadConfig, ResolvesCheckpointRelativeToFile) {
  const auto dir = std::filesystem::temp_directory_path() / "mcf_cfg_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "cfg.json")
      << R"({"scenario": "workflow-filtered", "seed": 3, "filter": {"kind": "mlp", "checkpoint": "f.json"}})";
  const auto c = load_config(dir / "cfg.json");
  EXPECT_EQ(std::filesystem::path(c.filter.checkpoint), dir / "f.json");
  std::filesystem::remove_all(dir);
}

// --- CSV ---------------------------------------------------------------------

TEST(WriteCsv, RerunIsByteIdentical) {
  const auto a = run_experiment(small_workflow(5));
  const auto b = run_experiment(small_workflow(5));
  ASSERT_TRUE(a.table && b.table);
  const std::string csv = write_csv(*a.table);
  EXPECT_EQ(csv, write_csv(*b.table));
  EXPECT_EQ(a.summary.dump(), b.summary.dump());
  EXPECT_NE(csv, write_csv(*run_experiment(small_workflow(6)).table));
}

TEST(WriteCsv, LayoutAndRoundTrip) {
  const auto result = run_experiment(small_workflow(7));
  const std::string csv = write_csv(*result.table);
  EXPECT_EQ(csv.rfind("# schema=1\nscenario,t,n_t,mse,mean_V,exceed_0.1,exceed_0.2,exceed_0.5,trials,config_hash\n", 0),
            0u);
  EXPECT_EQ(count(csv, "\n"), 2u + 21u);
  const ResultTable back = parse_csv(csv);
  EXPECT_EQ(back.rows, result.table->rows);
  EXPECT_EQ(back.deltas, result.table->deltas);
  EXPECT_EQ(back.config_hash, config_hash(small_workflow(7)));
  EXPECT_EQ(write_csv(back), csv);
}

TEST(WriteCsv, StrideKeepsLastStep) {
  ExperimentConfig c = small_workflow(8);
  c.record_stride = 7;
  const auto table = *run_experiment(c).table;
  std::vector<std::size_t> steps;
  for (const auto& r : table.rows) steps.push_back(r.t);
  EXPECT_EQ(steps, (std::vector<std::size_t>{0, 7, 14, 20}));
}

TEST(ParseCsv, RejectsMalformed) {
  EXPECT_THROW(parse_csv(""), ValidationError);
  EXPECT_THROW(parse_csv("# schema=2\n"), ValidationError);
  const std::string good = write_csv(*run_experiment(small_workflow(9)).table);
  std::string truncated = good.substr(0, good.rfind(',', good.size() - 2));
  EXPECT_THROW(parse_csv(truncated + "\n"), ValidationError);
}

// --- Helpers -----------------------------------------------------------------

TEST(TrendSlope, ExactLine) {
  const std::vector<double> t{0, 1, 2, 3, 4};
  const std::vector<double> y{1, 3, 5, 7, 9};
  EXPECT_NEAR(trend_slope(t, y), 2.0, 1e-14);
}

TEST(MaxIsotonicViolation, Examples) {
  EXPECT_EQ(max_isotonic_violation(std::vector<double>{5, 4, 4, 1}, 0), 0.0);
  // Pool {1, 3} -> 2, residual 1.
  EXPECT_NEAR(max_isotonic_violation(std::vector<double>{1, 3}, 0), 1.0, 1e-15);
  EXPECT_EQ(max_isotonic_violation(std::vector<double>{1, 3, 2}, 1), 0.0);
}

TEST(MaxIsotonicViolation, PropertyZeroOnNonincreasingAndBoundedByRange) {
  Gen gen(90);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> s(gen.index(1, 40));
    for (auto& x : s) x = gen.uniform(-1.0, 1.0);
    std::vector<double> sorted = s;
    std::sort(sorted.rbegin(), sorted.rend());
    EXPECT_EQ(max_isotonic_violation(sorted, 0), 0.0);
    const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    EXPECT_LE(max_isotonic_violation(s, 0), *hi - *lo + 1e-12);
  }
}

// --- Compare and plot ----------------------------------------------------------

TEST(CompareRuns, IdenticalTablesGiveUnitRatio) {
  const auto table = *run_experiment(small_workflow(10)).table;
  const Comparison cmp = compare_runs(table, table);
  for (const auto& r : cmp.rows) EXPECT_EQ(r.ratio, 1.0);
  EXPECT_EQ(cmp.final_ratio, 1.0);
  EXPECT_EQ(cmp.ratio_slope, 0.0);
}

TEST(CompareRuns, GrowingBaselineAgainstBoundedTreatment) {
  ExperimentConfig base = small_workflow(11);
  ExperimentConfig treat = base;
  treat.scenario = Scenario::kWorkflowFiltered;
  treat.filter.kind = FilterHandle::Kind::kOracle;
  treat.filter.gamma = 0.5;
  treat.candidates_per_round = 100;
  const Comparison cmp = compare_runs(*run_experiment(base).table, *run_experiment(treat).table);
  EXPECT_GT(cmp.ratio_slope, 0.0);
  EXPECT_GT(cmp.final_ratio, 1.0);
  EXPECT_TRUE(cmp.increasing);
  EXPECT_EQ(count(cmp.csv(), "\n"), cmp.rows.size() + 2);
}

TEST(CompareRuns, RejectsMismatchedGrids) {
  const auto a = *run_experiment(small_workflow(12)).table;
  ExperimentConfig c = small_workflow(12);
  c.horizon = 10;
  EXPECT_THROW(compare_runs(a, *run_experiment(c).table), ValidationError);
  c = small_workflow(12);
  c.deltas = {0.3};
  EXPECT_THROW(compare_runs(a, *run_experiment(c).table), ValidationError);
}

TEST(EmitPlot, OneVertexPerRowAndDeterministic) {
  const auto table = *run_experiment(small_workflow(13)).table;
  for (PlotKind kind : {PlotKind::kLinear, PlotKind::kLog}) {
    const std::string svg = emit_plot(table, kind);
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    const auto begin = svg.find("points=\"");
    ASSERT_NE(begin, std::string::npos);
    const auto end = svg.find('"', begin + 8);
    const std::string pts = svg.substr(begin + 8, end - begin - 8);
    EXPECT_EQ(count(pts, ","), table.rows.size());
    EXPECT_EQ(svg, emit_plot(table, kind));
  }
  ResultTable empty = table;
  empty.rows.clear();
  EXPECT_THROW(emit_plot(empty, PlotKind::kLinear), ValidationError);
  EXPECT_THROW(parse_plot_kind("bar"), ValidationError);
}

// --- Scenarios -----------------------------------------------------------------

TEST(RunExperiment, SummaryCarriesChecks) {
  const auto r = run_experiment(small_workflow(14));
  EXPECT_EQ(r.summary["scenario"], "workflow");
  EXPECT_EQ(r.summary["seed"], 14);
  EXPECT_EQ(r.summary["checks"].size(), r.checks.size());
  EXPECT_EQ(r.summary["all_checks_passed"].get<bool>(), r.all_passed());
}

TEST(RunExperiment, RatesTableTracksRecurrence) {
  ExperimentConfig c;
  c.scenario = Scenario::kRates;
  c.seed = 15;
  c.rates.steps = 20000;
  c.record_stride = 1000;
  const auto r = run_experiment(c);
  ASSERT_TRUE(r.table);
  EXPECT_EQ(r.table->rows.back().t, 20000u);
  for (const auto& row : r.table->rows) EXPECT_EQ(row.mse, row.mean_v);
}

TEST(RunExperiment, ConcentrationRowsPerSize) {
  ExperimentConfig c;
  c.scenario = Scenario::kConcentration;
  c.seed = 16;
  c.model.dim = 1;
  c.trials = 2000;
  c.concentration.sizes = {1, 4, 16};
  c.concentration.delta = 1.0;
  const auto r = run_experiment(c);
  ASSERT_TRUE(r.table);
  ASSERT_EQ(r.table->rows.size(), 3u);
  EXPECT_EQ(r.table->rows[2].t, 16u);
}

TEST(RunExperiment, WritesOutputs) {
  const auto dir = std::filesystem::temp_directory_path() / "mcf_out_test";
  std::filesystem::remove_all(dir);
  write_outputs(run_experiment(small_workflow(17)), dir);
  EXPECT_TRUE(std::filesystem::exists(dir / "results.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.json"));
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace mcf
