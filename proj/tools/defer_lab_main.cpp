#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "deferlab/errors.hpp"
#include "deferlab/harness.hpp"
#include "deferlab/hypotheses.hpp"
#include "deferlab/io.hpp"
#include "deferlab/rng.hpp"
#include "deferlab/worlds.hpp"

namespace {

int run_verify(const std::string& suite, bool mutate) {
  deferlab::VerifyParams params;
  params.mutate_gradient_sign = mutate;
  // Single-suite runs reuse the same derived seeds as the full run so their
  // numbers agree with the aggregate report.
  std::vector<deferlab::SuiteReport> suites;
  if (suite.empty()) {
    suites = deferlab::run_verifications(params);
  } else if (suite == "consistency") {
    suites.push_back(
        deferlab::consistency_suite(params.consistency_worlds, deferlab::hash_seed(params.seed, 1)));
  } else if (suite == "calibration") {
    suites.push_back(
        deferlab::calibration_suite(params.calibration_trials, deferlab::hash_seed(params.seed, 2)));
  } else if (suite == "gradient_check") {
    suites.push_back(deferlab::gradient_suite(params.gradient_checks,
                                              deferlab::hash_seed(params.seed, 3),
                                              params.mutate_gradient_sign));
  } else if (suite == "cal_failure") {
    suites.push_back(deferlab::cal_failure_suite(params.cal_rounds, params.cal_queries_per_round,
                                                 params.cal_dis_mc,
                                                 deferlab::hash_seed(params.seed, 4)));
  } else if (suite == "theorem1") {
    suites.push_back(deferlab::theorem1_suite(params.theorem1_eps, params.theorem1_d_list,
                                              params.theorem1_random_worlds,
                                              params.theorem1_support,
                                              deferlab::hash_seed(params.seed, 5)));
  } else {
    std::cerr << "unknown suite: " << suite
              << " (expected consistency | calibration | gradient_check | cal_failure | theorem1)\n";
    return 2;
  }
  std::cout << deferlab::suites_to_json(suites);
  for (const deferlab::SuiteReport& s : suites) {
    if (!s.pass) return 1;
  }
  return 0;
}

int run_dataset_gen(const std::string& world, std::size_t n, std::uint64_t seed,
                    const std::string& out_csv, int d, double eps, const std::string& world_json) {
  std::vector<deferlab::Sample> samples;
  if (world == "fig4") {
    const deferlab::ContinuousWorld w = deferlab::make_fig4_world();
    samples = deferlab::sample_labeled(deferlab::WorldView(w), n, seed);
  } else if (world == "theorem1") {
    const std::vector<deferlab::Vec> support = deferlab::theorem1_support(d);
    const deferlab::FiniteClass classH = deferlab::make_support_bounded_class(support, d, 2, 1);
    const deferlab::AtomicWorld w = deferlab::make_theorem1_world(d, eps, classH);
    samples = deferlab::sample_labeled(deferlab::WorldView(w), n, seed);
  } else if (world == "cal_counterexample") {
    const deferlab::CalCounterexample cal = deferlab::make_cal_counterexample_world();
    samples = deferlab::sample_labeled(deferlab::WorldView(cal.world), n, seed);
  } else if (world == "custom_atomic") {
    if (world_json.empty()) {
      throw deferlab::ConfigError("custom_atomic needs --world-json <path>");
    }
    const deferlab::AtomicWorld w = deferlab::load_atomic_world_json(world_json);
    samples = deferlab::sample_labeled(deferlab::WorldView(w), n, seed);
  } else {
    throw deferlab::ConfigError(
        "unknown world: " + world +
        " (expected fig4 | theorem1 | cal_counterexample | custom_atomic)");
  }
  deferlab::write_dataset_csv(out_csv, samples);
  std::cout << "wrote " << out_csv << " (" << samples.size() << " samples)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"defer-lab: deferral losses, exhaustive ERM, surrogate checks, and active learning"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment described by a config file");
  std::string config_path;
  run->add_option("config", config_path, "Path to a key = value config file")->required();

  auto* verify = app.add_subcommand("verify", "Run verification suites and print a JSON report");
  std::string suite;
  bool mutate = false;
  verify->add_option("--suite", suite,
                     "Single suite: consistency | calibration | gradient_check | cal_failure | theorem1");
  verify->add_flag("--mutate-gradient-sign", mutate,
                   "Negate the analytic gradient so gradient_check must fail");

  auto* dataset = app.add_subcommand("dataset", "Dataset utilities");
  dataset->require_subcommand(1);
  auto* gen = dataset->add_subcommand("gen", "Sample a labeled dataset to CSV");
  std::string world;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string out_csv;
  int d = 2;
  double eps = 0.1;
  std::string world_json;
  gen->add_option("world", world, "fig4 | theorem1 | cal_counterexample | custom_atomic")
      ->required();
  gen->add_option("n", n, "Number of samples")->required();
  gen->add_option("seed", seed, "Sampling seed")->required();
  gen->add_option("out", out_csv, "Output CSV path")->required();
  gen->add_option("--d", d, "theorem1: classifier capacity (default 2)");
  gen->add_option("--eps", eps, "theorem1: mass tilt in [0, 1) (default 0.1)");
  gen->add_option("--world-json", world_json, "custom_atomic: world description file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // --help exits 0; bad usage is a config error
  }

  try {
    if (run->parsed()) return deferlab::run_experiment_file(config_path);
    if (verify->parsed()) return run_verify(suite, mutate);
    if (gen->parsed()) return run_dataset_gen(world, n, seed, out_csv, d, eps, world_json);
  } catch (const deferlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
