// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.
// Usage: mcf_acceptance [criterion numbers...]   (default: all)
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "mcf/checkpoint.hpp"
#include "mcf/contraction.hpp"
#include "mcf/errors.hpp"
#include "mcf/experiment.hpp"
#include "mcf/io.hpp"
#include "reference_loss.hpp"
#include "support.hpp"

namespace mcf {
namespace {

struct Outcome {
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::vector<double> steps_of(const ResultTable& t) {
  std::vector<double> out;
  for (const auto& r : t.rows) out.push_back(static_cast<double>(r.t));
  return out;
}

std::vector<double> mse_of(const ResultTable& t) {
  std::vector<double> out;
  for (const auto& r : t.rows) out.push_back(r.mse);
  return out;
}

ResultTable table_of(const ExperimentConfig& c) {
  c.validate();
  auto result = run_experiment(c);
  if (!result.table) throw Error("scenario produced no table");
  return std::move(*result.table);
}

ExperimentConfig workflow_config(std::size_t dim, std::size_t horizon, std::size_t trials, std::uint64_t seed) {
  ExperimentConfig c;
  c.scenario = Scenario::kWorkflow;
  c.model.dim = dim;
  c.schedule = SampleSchedule::constant(100);
  c.horizon = horizon;
  c.trials = trials;
  c.seed = seed;
  return c;
}

// 1. Unfiltered Gaussian workflow accumulates error linearly.
Outcome collapse_baseline() {
  const auto table = table_of(workflow_config(1, 400, 500, 101));
  const double final_mse = table.rows.back().mse;
  const double oracle = 400.0 / 100.0;
  const double final_err = std::abs(final_mse / oracle - 1.0);
  const auto t = steps_of(table);
  const auto mse = mse_of(table);
  const double slope = fit_line(t, mse).slope;
  const double slope_err = std::abs(slope / 0.01 - 1.0);
  return {final_err <= 0.15 && slope_err <= 0.15, std::max(final_err, slope_err), 0.15,
          "final_mse=" + fmt("%.4f", final_mse) + " (oracle " + fmt("%.2f", oracle) + ", with initial fit " +
              fmt("%.2f", oracle + 0.01) + ") slope=" + fmt("%.5f", slope) + " (oracle 0.01)"};
}

// 2. Contraction dynamics: exceedance vanishes and decreases after burn-in.
Outcome contraction_dynamics() {
  ExperimentConfig c;
  c.scenario = Scenario::kDynamics;
  c.horizon = 10000;
  c.trials = 1000;
  c.seed = 202;
  c.noise.kind = NoiseSchedule::Kind::kPowerLaw;
  c.noise.beta = 1.0;
  c.deltas = {0.1, 0.2, 0.5};
  const auto table = table_of(c);
  const std::size_t idx = 1;  // δ = 0.2
  std::vector<double> series;
  for (const auto& r : table.rows) series.push_back(r.exceed[idx]);
  const double final_exceed = series.back();
  const auto burn_in = static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(c.horizon)));
  const double violation = max_isotonic_violation(series, burn_in);
  std::string others;
  for (std::size_t k : {0u, 2u}) {
    std::vector<double> s;
    for (const auto& r : table.rows) s.push_back(r.exceed[k]);
    others += " viol(δ=" + fmt("%g", c.deltas[k]) + ")=" + fmt("%.4f", max_isotonic_violation(s, burn_in));
  }
  return {final_exceed < 0.05 && violation <= 0.02, violation, 0.02,
          "final_exceed(δ=0.2)=" + fmt("%.4f", final_exceed) + " (< 0.05) isotonic_violation=" +
              fmt("%.4f", violation) + others};
}

// 3. Comparison recursion decay rates.
Outcome rate_table() {
  const std::size_t steps = 1'000'000;
  struct Row {
    double p, beta, expected;
  };
  double worst = 0.0;
  std::string detail;
  for (const Row& row : {Row{2, 1, -0.5}, Row{2, 2, -1.0}, Row{3, 3, -0.5}}) {
    const auto x = recurrence_simulate(RegulatorFn::power_law(row.p, 1.0), 1.0,
                                       power_law_bounds(steps, row.beta), steps);
    const double slope = fit_decay_rate(x, 0.9).slope;
    worst = std::max(worst, std::abs(slope - row.expected));
    detail += "(p=" + fmt("%g", row.p) + ",β=" + fmt("%g", row.beta) + ") slope=" + fmt("%.4f", slope) + " ";
  }

  // p = 1: geometric decay at rate ln(1 − c1) until the t^{−β} floor takes over.
  const double c1 = 0.5, beta = 1.0;
  const auto x = recurrence_simulate(RegulatorFn::power_law(1.0, c1), 1e6, power_law_bounds(steps, beta), steps);
  std::size_t end = 1;
  while (end < 200 && x[end] > 0.0 && x[end] / x[end - 1] < std::sqrt(1.0 - c1)) ++end;
  const double geo = fit_exponential_rate(x, 0, end).slope;
  const double geo_err = std::abs(geo / std::log(1.0 - c1) - 1.0);
  const double floor_slope = fit_decay_rate(x, 0.9).slope;
  const double floor_err = std::abs(floor_slope + beta);
  detail += "p=1: geometric phase t<" + std::to_string(end) + " rate=" + fmt("%.4f", geo) + " (ln 0.5=" +
            fmt("%.4f", std::log(1.0 - c1)) + ") floor slope=" + fmt("%.4f", floor_slope);
  const bool ok = worst <= 0.1 && end >= 10 && geo_err <= 0.1 && floor_err <= 0.1;
  return {ok, std::max(worst, floor_err), 0.1, detail};
}

// 4. Tail of the recursion is bounded by the largest root, whatever the start.
Outcome limsup_independence() {
  const auto f = RegulatorFn::power_law(2.0, 1.0);
  const std::size_t steps = 100'000;
  const std::vector<double> b(steps, 0.01);
  const double bound = 0.1 + 1e-6;
  double worst = 0.0;
  std::string detail;
  for (double x0 : {0.5, 1.0, 10.0}) {
    const auto x = recurrence_simulate(f, x0, b, steps);
    const double tail_max = *std::max_element(x.begin() + steps / 2, x.end());
    worst = std::max(worst, tail_max);
    detail += "x0=" + fmt("%g", x0) + ": tail_max=" + fmt("%.9f", tail_max) + " ";
  }
  detail += "root=" + fmt("%.12f", limsup_bound(f, 0.01));
  return {worst <= bound, worst, bound, detail};
}

// 5. Analytic loss gradient against central differences of an independent loss.
Outcome gradient_check() {
  testing::Gen gen(505);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const auto tc = testing::random_gradient_case(gen);
    const auto analytic = loss_gradient(tc.params, tc.data, tc.model, tc.anchors, tc.config).gradient.flat();
    const auto fd = testing::finite_difference_gradient(tc.params, tc.data, tc.model, tc.anchors, tc.config);
    worst = std::max(worst, testing::max_relative_error(analytic, fd, 1e-6));
  }
  return {worst <= 1e-4, worst, 1e-4, "50 cases, relative to max(|g|, 1e-6)"};
}

ExperimentConfig train_config() {
  ExperimentConfig c;
  c.scenario = Scenario::kTrainFilter;
  c.model.dim = 2;
  c.candidates_per_round = 1000;
  c.train.contamination = 0.3;
  c.seed = 606;
  return c;
}

const CheckResult& find_check(const ExperimentResult& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return c;
  throw Error("missing check " + name);
}

// 6. Filter training drives the contraction loss to zero and generalizes.
Outcome filter_training() {
  const auto c = train_config();
  c.validate();
  const auto result = run_experiment(c);
  const auto& loss = find_check(result, "final_contraction_loss");
  const auto& acc = find_check(result, "holdout_accuracy");
  const auto& cert = find_check(result, "contraction_certificate");
  // The saved checkpoint must parse back with its hash intact.
  const auto ckpt = parse_checkpoint(result.extra_files.at("filter.json"));
  const bool ok = loss.value <= 1e-6 && acc.value >= 0.90 && cert.passed;
  return {ok, loss.value, 1e-6,
          "holdout_accuracy=" + fmt("%.4f", acc.value) + " (>= 0.90) certificate V_new=" + fmt("%.6g", cert.value) +
              " <= " + fmt("%.6g", cert.threshold) + " hidden=" + std::to_string(ckpt.params.hidden())};
}

// 7. Filtering prevents collapse end to end.
Outcome collapse_prevention() {
  const auto base_cfg = workflow_config(2, 200, 200, 707);
  const auto base = table_of(base_cfg);

  ExperimentConfig oracle_cfg = base_cfg;
  oracle_cfg.scenario = Scenario::kWorkflowFiltered;
  oracle_cfg.filter.kind = FilterHandle::Kind::kOracle;
  oracle_cfg.filter.gamma = 0.5;
  oracle_cfg.candidates_per_round = 0;
  const auto oracle = table_of(oracle_cfg);

  const auto dir = std::filesystem::temp_directory_path() / "mcf_acceptance";
  std::filesystem::create_directories(dir);
  const auto trained = run_experiment(train_config());
  write_file_atomic(dir / "filter.json", trained.extra_files.at("filter.json"));
  ExperimentConfig mlp_cfg = oracle_cfg;
  mlp_cfg.filter.kind = FilterHandle::Kind::kMlp;
  mlp_cfg.filter.checkpoint = (dir / "filter.json").string();
  const auto mlp = table_of(mlp_cfg);
  std::filesystem::remove_all(dir);

  const auto t = steps_of(base);
  const double base_slope = fit_line(t, mse_of(base)).slope;
  const std::size_t half = t.size() / 2;
  const auto oracle_mse = mse_of(oracle);
  const double oracle_tail_slope = trend_slope(std::span(t).subspan(half), std::span(oracle_mse).subspan(half));
  const Comparison cmp = compare_runs(base, oracle);
  const double mlp_gain = base.rows.back().mse / mlp.rows.back().mse;
  const bool ok = base_slope > 0.0 && oracle_tail_slope <= 0.0 && cmp.final_ratio > 5.0 && cmp.ratio_slope > 0.0 &&
                  mlp_gain >= 2.0;
  return {ok, cmp.final_ratio, 5.0,
          "baseline_slope=" + fmt("%.4g", base_slope) + " oracle_last_half_slope=" + fmt("%.3g", oracle_tail_slope) +
              " ratio_slope=" + fmt("%.4g", cmp.ratio_slope) + " mlp_gain=" + fmt("%.2f", mlp_gain) + " (>= 2)"};
}

// 8. Eigenvalue contraction verdict against brute-force sampling.
Outcome checker_equivalence() {
  testing::Gen gen(808);
  int disagreements = 0;
  double closest_margin = INFINITY;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t d = gen.index(2, 4);
    const LyapunovMetric p(gen.spd(d, 0.2));
    const Matrix a = (gen.uniform(0.0, 1.2) / std::sqrt(static_cast<double>(d))) * gen.matrix(d, d);
    const double c = gen.uniform(0.0, 0.99);
    const double tol = default_contraction_tolerance(p);
    const bool verdict = check_matrix_contraction(a, p, c, tol);
    bool sampled = true;
    for (int k = 0; k < 10000 && sampled; ++k) {
      const Vector e = gen.unit_vector(d);
      sampled = lyapunov_value(p, a * e) <= (1.0 - c) * lyapunov_value(p, e) + tol;
    }
    if (verdict != sampled) {
      ++disagreements;
      const Matrix m = (1.0 - c) * p.p().matrix() - a.transpose() * (p.p().matrix() * a);
      closest_margin = std::min(closest_margin, std::abs(sym_eig(SymmetricMatrix::symmetrize(m)).values[0]));
    }
  }
  std::string detail = "1000 triples x 10000 unit vectors";
  if (disagreements > 0) detail += ", largest missed |λ_min|=" + fmt("%.3g", closest_margin);
  return {disagreements == 0, static_cast<double>(disagreements), 0.0, detail};
}

// 9. Concentration curve of the Gaussian mean estimator.
Outcome concentration_curve() {
  const auto model = ExpFamilyModel::gaussian(1);
  const std::vector<std::size_t> sizes{1, 10, 100};
  const auto pts = measure_concentration(model, Parameter{Vector{1.0}}, sizes, 3.0, 100'000, RngState(909, 0));
  const double oracle = std::erfc(3.0 / std::sqrt(2.0));
  const double err = std::abs(pts[0].exceedance - oracle);
  const bool monotone = pts[1].exceedance <= pts[0].exceedance && pts[2].exceedance <= pts[1].exceedance;
  return {err <= 0.002 && monotone, err, 0.002,
          "n=1: " + fmt("%.5f", pts[0].exceedance) + " (oracle " + fmt("%.5f", oracle) + ") n=10: " +
              fmt("%.5f", pts[1].exceedance) + " n=100: " + fmt("%.5f", pts[2].exceedance)};
}

// 10. Identical config and seed give byte-identical CSV.
Outcome reproducibility() {
  std::vector<ExperimentConfig> configs;
  configs.push_back(workflow_config(2, 50, 32, 1010));
  ExperimentConfig dyn;
  dyn.scenario = Scenario::kDynamics;
  dyn.horizon = 200;
  dyn.trials = 64;
  dyn.seed = 1011;
  configs.push_back(dyn);
  ExperimentConfig filt = workflow_config(2, 50, 32, 1012);
  filt.scenario = Scenario::kWorkflowFiltered;
  filt.filter.kind = FilterHandle::Kind::kOracle;
  configs.push_back(filt);
  ExperimentConfig rates;
  rates.scenario = Scenario::kRates;
  rates.rates.steps = 10000;
  rates.record_stride = 100;
  rates.seed = 1013;
  configs.push_back(rates);
  ExperimentConfig conc;
  conc.scenario = Scenario::kConcentration;
  conc.trials = 2000;
  conc.seed = 1014;
  configs.push_back(conc);

  int mismatches = 0;
  for (const auto& c : configs) {
    if (write_csv(table_of(c)) != write_csv(table_of(c))) ++mismatches;
  }
  return {mismatches == 0, static_cast<double>(mismatches), 0.0,
          std::to_string(configs.size()) + " scenarios run twice"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace mcf

int main(int argc, char** argv) {
  using namespace mcf;
  const std::vector<Criterion> all{
      {1, "collapse-baseline", collapse_baseline},       {2, "contraction-dynamics", contraction_dynamics},
      {3, "rate-table", rate_table},                     {4, "limsup-independence", limsup_independence},
      {5, "gradient-check", gradient_check},             {6, "filter-training", filter_training},
      {7, "collapse-prevention", collapse_prevention},   {8, "checker-equivalence", checker_equivalence},
      {9, "concentration-curve", concentration_curve},   {10, "reproducibility", reproducibility},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, NAN, NAN, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.passed) ++failed;
    std::printf("[%s] %2d %-22s value=%-12.6g threshold=%-8.3g %7.1fs  %s\n", o.passed ? "PASS" : "FAIL", c.id,
                c.name, o.value, o.threshold, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d failed\n", failed);
  return failed == 0 ? 0 : 1;
}
