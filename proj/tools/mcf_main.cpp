// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
//
// mcf: runs experiment scenarios and post-processes their CSV results.
//
// Exit codes: 0 success, 1 invalid input, 2 a --check failed, 3 runtime error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mcf/errors.hpp"
#include "mcf/experiment.hpp"
#include "mcf/io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitCheckFailed = 2;
constexpr int kExitRuntime = 3;

struct RunFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::string out;
  bool check = false;
};

void add_run_flags(CLI::App& cmd, RunFlags& flags) {
  cmd.add_option("--config", flags.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
  cmd.add_option("--seed", flags.seed, "RNG seed; overrides the config");
  cmd.add_option("--trials", flags.trials, "Trial count; overrides the config");
  cmd.add_option("--out", flags.out, "Output directory; overrides the config");
  cmd.add_flag("--check", flags.check, "Exit 2 unless every acceptance check passes");
}

mcf::ExperimentConfig resolve_config(const RunFlags& flags, std::initializer_list<mcf::Scenario> allowed) {
  mcf::ExperimentConfig config;
  if (!flags.config.empty()) {
    config = mcf::load_config(flags.config);
  } else {
    config.scenario = *allowed.begin();
  }
  if (std::find(allowed.begin(), allowed.end(), config.scenario) == allowed.end()) {
    throw mcf::ValidationError("scenario: '" + std::string(mcf::scenario_name(config.scenario)) +
                               "' does not belong to this subcommand");
  }
  if (flags.seed) config.seed = flags.seed;
  if (flags.trials) config.trials = *flags.trials;
  if (!flags.out.empty()) config.out = flags.out;
  return config;
}

int run(const RunFlags& flags, std::initializer_list<mcf::Scenario> allowed) {
  const mcf::ExperimentConfig config = resolve_config(flags, allowed);
  const mcf::ExperimentResult result = mcf::run_experiment(config);
  mcf::write_outputs(result, config.out);

  std::cout << mcf::scenario_name(config.scenario) << ": wrote " << config.out << "\n";
  for (const auto& c : result.checks) {
    std::printf("  [%s] %s value=%.6g threshold=%.6g%s%s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.value,
                c.threshold, c.detail.empty() ? "" : " ", c.detail.c_str());
  }
  return flags.check && !result.all_passed() ? kExitCheckFailed : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contraction-filter model-collapse simulations"};
  app.require_subcommand(1);

  RunFlags dyn_flags, wf_flags, train_flags, rates_flags, conc_flags;
  auto* dyn = app.add_subcommand("simulate-dynamics", "Monte-Carlo error dynamics under a contraction map");
  auto* wf = app.add_subcommand("simulate-workflow", "Recursive training chain, optionally filtered");
  auto* train = app.add_subcommand("train-filter", "Train the neural filter on drift data");
  auto* rates = app.add_subcommand("verify-rates", "Deterministic recurrence and decay-rate fit");
  auto* conc = app.add_subcommand("measure-concentration", "Estimator tail probability against sample size");
  add_run_flags(*dyn, dyn_flags);
  add_run_flags(*wf, wf_flags);
  add_run_flags(*train, train_flags);
  add_run_flags(*rates, rates_flags);
  add_run_flags(*conc, conc_flags);

  std::string baseline, treatment, compare_out = "compare";
  auto* compare = app.add_subcommand("compare", "Per-step MSE ratio of two result tables");
  compare->add_option("baseline", baseline, "Baseline results.csv")->required()->check(CLI::ExistingFile);
  compare->add_option("treatment", treatment, "Treatment results.csv")->required()->check(CLI::ExistingFile);
  compare->add_option("--out", compare_out, "Output directory");

  std::string plot_input, plot_kind = "log", plot_out = "plot.svg";
  auto* plot = app.add_subcommand("plot", "Render MSE against t as SVG");
  plot->add_option("table", plot_input, "results.csv")->required()->check(CLI::ExistingFile);
  plot->add_option("--kind", plot_kind, "linear or log")->check(CLI::IsMember({"linear", "log"}));
  plot->add_option("--out", plot_out, "Output SVG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  using mcf::Scenario;
  try {
    if (*dyn) return run(dyn_flags, {Scenario::kDynamics});
    if (*wf) return run(wf_flags, {Scenario::kWorkflow, Scenario::kWorkflowFiltered});
    if (*train) return run(train_flags, {Scenario::kTrainFilter});
    if (*rates) return run(rates_flags, {Scenario::kRates});
    if (*conc) return run(conc_flags, {Scenario::kConcentration});
    if (*compare) {
      const auto cmp = mcf::compare_runs(mcf::parse_csv(mcf::read_file(baseline)),
                                         mcf::parse_csv(mcf::read_file(treatment)));
      const std::filesystem::path dir = compare_out;
      std::filesystem::create_directories(dir);
      mcf::write_file_atomic(dir / "comparison.csv", cmp.csv());
      mcf::write_file_atomic(dir / "comparison.json", cmp.summary().dump(2) + "\n");
      std::printf("final ratio %.6g, ratio slope %.6g (%s)\n", cmp.final_ratio, cmp.ratio_slope,
                  cmp.increasing ? "increasing" : "not increasing");
      return kExitOk;
    }
    if (*plot) {
      const auto table = mcf::parse_csv(mcf::read_file(plot_input));
      mcf::write_file_atomic(plot_out, mcf::emit_plot(table, mcf::parse_plot_kind(plot_kind)));
      return kExitOk;
    }
  } catch (const mcf::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitInvalid;
}
