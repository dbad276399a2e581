#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "deferlab/errors.hpp"
#include "deferlab/harness.hpp"
#include "deferlab/io.hpp"

using namespace deferlab;

namespace {

std::filesystem::path temp_dir(const std::string& leaf) {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "deferlab_tests" / leaf;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("harness: mean and standard error") {
  CHECK(mean_of({1.0, 2.0, 3.0}) == doctest::Approx(2.0));
  CHECK(stderr_of({1.0, 2.0, 3.0}) == doctest::Approx(1.0 / std::sqrt(3.0)));
  CHECK(stderr_of({5.0}) == 0.0);
  CHECK_THROWS_AS(mean_of({}), EmptyDataError);
}

TEST_CASE("harness: parallel_map returns ordered results and rethrows") {
  const std::vector<int> r = parallel_map<int>(5, 2, [](std::size_t i) {
    return static_cast<int>(i * i);
  });
  CHECK(r == std::vector<int>{0, 1, 4, 9, 16});
  CHECK_THROWS_AS(parallel_map<int>(4, 2,
                                    [](std::size_t i) -> int {
                                      if (i == 2) throw OutOfRangeError("boom");
                                      return 0;
                                    }),
                  OutOfRangeError);
}

TEST_CASE("harness: trace CSV golden bytes") {
  std::vector<RoundRow> rows(2);
  rows[0] = {1, 5, 3, 0.5, 0.0};
  rows[1] = {2, 10, 2, 0.25, 0.125};
  CHECK(trace_to_csv(rows) ==
        "round,labels_used,version_space_size,dis_mass_estimate,exact_risk\n"
        "1,5,3,0.5,0\n"
        "2,10,2,0.25,0.125\n");
}

TEST_CASE("harness: adversarial sweep renders exact frozen gaps") {
  ModelComplexityParams p;
  p.world = "theorem1";
  p.d_list = {1, 2, 3};
  p.eps = 0.1;
  const ModelComplexityResult r = model_complexity_sweep(p);
  CHECK(model_complexity_csv(r) ==
        "classifier_class_size,joint_minus_staged_accuracy_gap,stderr\n"
        "1,0.45,0\n"
        "2,0.3,0\n"
        "3,0.225,0\n");
  CHECK(r.bound_violations == 0);
}

TEST_CASE("harness: random-world sweep stays under the capacity-ratio bound") {
  ModelComplexityParams p;
  p.world = "random_atomic";
  p.d_list = {1, 2, 3};
  p.rejector_capacity = 2;
  p.support_size = 5;
  p.trials = 25;
  p.seed = 3;
  p.threads = 1;
  const ModelComplexityResult r = model_complexity_sweep(p);
  CHECK(r.rows.size() == 3);
  CHECK(r.bound_violations == 0);
  for (const ModelComplexityRow& row : r.rows) {
    CHECK(row.gap_mean >= 0.0);
    CHECK(row.gap_mean <= 1.0);
  }
}

TEST_CASE("harness: gnuplot rendering comments the header") {
  CHECK(csv_to_gnuplot("a,b\n1,2\n3,4\n") == "# a b\n1 2\n3 4\n");
}

TEST_CASE("harness: tradeoff sweep is deterministic at desk scale") {
  TradeoffParams p;
  p.n_total = 200;
  p.fractions = {0.05, 0.5};
  p.trials = 2;
  p.grid_cells = 500;
  p.epochs = 60;
  p.learning_rate = 1.0;
  p.seed = 17;
  p.threads = 1;
  const TradeoffResult a = data_tradeoff_sweep(p);
  const TradeoffResult b = data_tradeoff_sweep(p);
  CHECK(data_tradeoff_csv(a) == data_tradeoff_csv(b));
  REQUIRE(a.rows.size() == 2);
  for (const TradeoffRow& row : a.rows) {
    CHECK(row.staged_risk >= 0.0);
    CHECK(row.staged_risk <= 1.0);
    CHECK(row.joint_risk >= 0.0);
    CHECK(row.joint_risk <= 1.0);
    CHECK(row.joint_semisup_risk >= 0.0);
    CHECK(row.joint_semisup_risk <= 1.0);
  }
  CHECK(a.rows[0].fraction == doctest::Approx(0.05));
}

TEST_CASE("harness: label-budget curve is deterministic and well-formed") {
  DodCurveParams p;
  p.rounds = 3;
  p.queries_per_round = 5;
  p.n_u = 100;
  p.n_test = 200;
  p.staged_unlabeled = 50;
  p.class_size = 20;
  p.trials = 3;
  p.seed = 5;
  p.threads = 1;
  p.dis_mc = 300;
  const DodCurveResult a = dod_curve_sweep(p);
  const DodCurveResult b = dod_curve_sweep(p);
  CHECK(dod_curve_csv(a) == dod_curve_csv(b));
  REQUIRE(a.rows.size() == 4);  // the zero-label baseline plus one row per round
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].human_labels_used == static_cast<std::int64_t>(5 * i));
    CHECK(a.rows[i].dod_risk >= 0.0);
    CHECK(a.rows[i].dod_risk <= 1.0);
  }
  // At zero labels all three methods degenerate to the same never-defer
  // classifier.
  CHECK(a.rows[0].dod_risk == a.rows[0].staged_risk);
  CHECK(a.rows[0].dod_risk == a.rows[0].joint_risk);
}

TEST_CASE("harness: verification suites pass and serialize") {
  VerifyParams p;
  p.consistency_worlds = 10;
  p.calibration_trials = 200;
  p.gradient_checks = 20;
  p.cal_rounds = 5;
  p.cal_dis_mc = 1000;
  p.theorem1_random_worlds = 10;
  p.seed = 42;
  const std::vector<SuiteReport> suites = run_verifications(p);
  REQUIRE(suites.size() == 5);
  const std::vector<std::string> names = {"consistency", "calibration", "gradient_check",
                                          "cal_failure", "theorem1"};
  for (std::size_t i = 0; i < suites.size(); ++i) {
    CHECK(suites[i].name == names[i]);
    CHECK(suites[i].pass);
  }
  const std::string json = suites_to_json(suites);
  CHECK(json.find("\"all_pass\": true") != std::string::npos);
  CHECK(json.find("\"gradient_check\"") != std::string::npos);

  VerifyParams bad = p;
  bad.mutate_gradient_sign = true;
  const std::vector<SuiteReport> mutated = run_verifications(bad);
  CHECK_FALSE(mutated[2].pass);
  CHECK(suites_to_json(mutated).find("\"all_pass\": false") != std::string::npos);
}

TEST_CASE("harness: config-driven runs map errors to exit codes") {
  CHECK(run_experiment_text("") == 2);                      // missing experiment
  CHECK(run_experiment_text("experiment = nope\n") == 2);   // unknown experiment
  CHECK(run_experiment_text("experiment = gradient_check\nbogus = 1\n") == 2);  // unused key

  const std::filesystem::path dir = temp_dir("exitcodes");
  const std::string base = "experiment = gradient_check\noutput_dir = " + dir.string() +
                           "\n[verify]\ngradient_checks = 20\n";
  CHECK(run_experiment_text(base) == 0);
  CHECK(std::filesystem::exists(dir / "gradient_check.json"));
  CHECK(run_experiment_text(base + "mutate_gradient_sign = true\n") == 1);
}

TEST_CASE("harness: config files rerun to identical bytes") {
  const std::filesystem::path dir_a = temp_dir("rerun_a");
  const std::filesystem::path dir_b = temp_dir("rerun_b");
  const std::string tmpl =
      "experiment = model_complexity\nseed = 9\ntrials = 10\noutput_dir = DIR\nthreads = 1\n"
      "emit_gnuplot = true\n[world]\nworld = random_atomic\nsupport_size = 5\n"
      "[classes]\nd_list = 1,2\nrejector_capacity = 1\n";
  auto with_dir = [&](const std::filesystem::path& d) {
    std::string s = tmpl;
    return s.replace(s.find("DIR"), 3, d.string());
  };
  CHECK(run_experiment_text(with_dir(dir_a)) == 0);
  CHECK(run_experiment_text(with_dir(dir_b)) == 0);
  const std::string csv_a = read_text_file((dir_a / "model_complexity.csv").string());
  const std::string csv_b = read_text_file((dir_b / "model_complexity.csv").string());
  CHECK(csv_a == csv_b);
  CHECK(!csv_a.empty());
  // The gnuplot twin mirrors the CSV.
  CHECK(read_text_file((dir_a / "model_complexity.dat").string()) == csv_to_gnuplot(csv_a));
}
