// Acceptance gate: one pass/fail line per criterion, nonzero exit when any
// fails. Each criterion re-derives its expected values independently of the
// library where a closed form exists, and enforces a wall-clock limit.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "deferlab/harness.hpp"
#include "deferlab/hypotheses.hpp"
#include "deferlab/io.hpp"
#include "deferlab/worlds.hpp"

using namespace deferlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void criterion(int n, const std::string& desc, double limit_seconds,
               const std::function<Outcome()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = fn();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < limit_seconds;
  const bool pass = out.pass && in_time;
  if (!pass) ++g_failures;
  std::ostringstream line;
  line << (pass ? "PASS" : "FAIL") << " criterion " << n << ": " << desc << " [" << secs << "s";
  if (!in_time) line << " > limit " << limit_seconds << "s";
  line << "]";
  if (!out.detail.empty()) line << " " << out.detail;
  std::cout << line.str() << "\n" << std::flush;
}

std::filesystem::path fresh_dir(const std::string& leaf) {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "deferlab_acceptance" / leaf;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

Outcome exact_adversarial_gaps() {
  const double eps = 0.1;
  for (int d : {1, 2, 3}) {
    const std::vector<Vec> support = theorem1_support(d);
    const FiniteClass classH = make_support_bounded_class(support, d, 2, 1);
    const FiniteClass classR = make_support_bounded_class(support, 1, 1, 0);
    const AtomicWorld world = make_theorem1_world(d, eps, classH);
    const ErmPairResult staged = staged_erm_exact(classH, classR, world);
    const ErmPairResult joint = joint_erm_exact(classH, classR, world);
    const double expected = (1.0 - eps) / static_cast<double>(d + 1);
    if (std::fabs(staged.risk - expected) > 1e-12) {
      return {false, "staged risk off at d=" + std::to_string(d) + ": " +
                         format_double(staged.risk)};
    }
    if (joint.risk != 0.0) {
      return {false, "joint risk nonzero at d=" + std::to_string(d) + ": " +
                         format_double(joint.risk)};
    }
  }
  return {true, "staged = (1-eps)/(d+1) within 1e-12 and joint = 0 for d in {1,2,3}"};
}

Outcome random_world_gap_bound() {
  ModelComplexityParams p;
  p.world = "random_atomic";
  p.d_list = {1, 2, 3};
  p.rejector_capacity = 1;  // binding capacity ratios 1, 1/2, 1/3
  p.support_size = 6;
  p.trials = 200;
  p.seed = 2024;
  const ModelComplexityResult r = model_complexity_sweep(p);
  std::ostringstream detail;
  detail << "600 worlds, violations=" << r.bound_violations;
  return {r.bound_violations == 0, detail.str()};
}

Outcome consistency_everywhere() {
  const SuiteReport s = consistency_suite(100, 7);
  std::ostringstream detail;
  detail << s.report.trials << " support points across 100 worlds, mismatches="
         << s.report.violations;
  return {s.pass && s.report.violations == 0, detail.str()};
}

Outcome calibration_inequality() {
  const SuiteReport s = calibration_suite(10000, 13);
  std::ostringstream detail;
  detail << s.report.trials << " trials, violations=" << s.report.violations;
  return {s.pass && s.report.trials >= 10000 && s.report.violations == 0, detail.str()};
}

Outcome gradient_agreement() {
  const SuiteReport s = gradient_suite(100, 29, false);
  std::ostringstream detail;
  detail << "max relative error " << s.report.max_violation;
  return {s.pass && s.report.max_violation < 1e-4, detail.str()};
}

Outcome stall_world_dis_mass() {
  const SuiteReport s = cal_failure_suite(100, 5, 10000, 31);
  std::ostringstream detail;
  detail << "rounds outside [0.45,0.55]: " << s.report.violations;
  return {s.pass && s.report.violations == 0, detail.str()};
}

Outcome label_budget_curve() {
  DodCurveParams p;  // defaults: 8 rounds x 10 queries, 100 thresholds, fig4
  p.trials = 200;
  p.seed = 0;
  const DodCurveResult r = dod_curve_sweep(p);
  std::int64_t first_dod_low = -1, first_joint_low = -1;
  for (const DodCurveRow& row : r.rows) {
    if (row.human_labels_used >= 20 && row.dod_risk > row.joint_risk) {
      return {false, "mean dod risk " + format_double(row.dod_risk) + " above joint " +
                         format_double(row.joint_risk) + " at budget " +
                         std::to_string(row.human_labels_used)};
    }
    if (first_dod_low < 0 && row.dod_risk <= 0.05) first_dod_low = row.human_labels_used;
    if (first_joint_low < 0 && row.joint_risk <= 0.05) first_joint_low = row.human_labels_used;
  }
  if (first_dod_low < 0) return {false, "dod never reaches mean risk 0.05"};
  if (first_joint_low < 0) return {false, "joint never reaches mean risk 0.05"};
  if (2 * first_dod_low > first_joint_low) {
    return {false, "dod needs " + std::to_string(first_dod_low) + " labels vs joint " +
                       std::to_string(first_joint_low)};
  }
  std::ostringstream detail;
  detail << "200 trials; risk<=0.05 at " << first_dod_low << " labels vs joint at "
         << first_joint_low;
  return {true, detail.str()};
}

Outcome labeled_fraction_tradeoff() {
  TradeoffParams p;  // defaults: n_total=2000, linear model, tuned optimizer
  p.trials = 20;
  p.seed = 11;
  const TradeoffResult r = data_tradeoff_sweep(p);
  for (const TradeoffRow& row : r.rows) {
    if (row.fraction > 0.1) continue;
    if (row.staged_risk > row.joint_risk) {
      return {false, "staged " + format_double(row.staged_risk) + " above joint " +
                         format_double(row.joint_risk) + " at fraction " +
                         format_double(row.fraction)};
    }
    const double lo = std::min(row.staged_risk, row.joint_risk);
    const double hi = std::max(row.staged_risk, row.joint_risk);
    const double dist = row.joint_semisup_risk < lo ? lo - row.joint_semisup_risk
                        : row.joint_semisup_risk > hi ? row.joint_semisup_risk - hi
                                                      : 0.0;
    if (dist > row.max_stderr) {
      return {false, "semisupervised risk " + format_double(row.joint_semisup_risk) +
                         " outside the staged-joint interval by " + format_double(dist) +
                         " (> 1 SE " + format_double(row.max_stderr) + ") at fraction " +
                         format_double(row.fraction)};
    }
  }
  return {true, "20 seeds; staged <= joint and semisupervised within the band at fractions <= 0.1"};
}

Outcome byte_identical_reruns() {
  struct Case {
    std::string name;
    std::string body;  // output_dir appended per run
    std::string artifact;
  };
  const std::vector<Case> cases = {
      {"model_complexity",
       "experiment = model_complexity\nseed = 5\ntrials = 8\nthreads = 2\n[world]\n"
       "world = random_atomic\nsupport_size = 5\n[classes]\nd_list = 1,2\n",
       "model_complexity.csv"},
      {"data_tradeoff",
       "experiment = data_tradeoff\nseed = 3\ntrials = 2\nthreads = 2\n[world]\n"
       "grid_cells = 500\n[data]\nn_total = 200\nfractions = 0.1,0.5\n[train]\n"
       "epochs = 60\nlearning_rate = 1.0\n",
       "data_tradeoff.csv"},
      {"dod_curve",
       "experiment = dod_curve\nseed = 9\ntrials = 3\nthreads = 2\n[classes]\n"
       "num_members = 20\n[active]\nrounds = 3\nqueries_per_round = 5\nn_u = 100\n"
       "n_test = 200\nstaged_unlabeled = 50\ndis_mc = 300\n",
       "dod_curve.csv"}};
  for (const Case& c : cases) {
    std::string outputs[2];
    for (int run = 0; run < 2; ++run) {
      const std::filesystem::path dir =
          fresh_dir(c.name + "_" + std::to_string(run));
      // Prepend: output_dir is a global key and must precede any [section].
      const std::string config = "output_dir = " + dir.string() + "\n" + c.body;
      const int code = run_experiment_text(config);
      if (code != 0) {
        return {false, c.name + " exited with code " + std::to_string(code)};
      }
      outputs[run] = read_text_file((dir / c.artifact).string());
    }
    if (outputs[0] != outputs[1]) {
      return {false, c.name + " reruns differ"};
    }
  }
  return {true, "model_complexity, data_tradeoff, dod_curve CSVs byte-identical across reruns"};
}

Outcome scale_limits_documented() {
#ifdef DEFERLAB_SOURCE_DIR
  const std::string readme = read_text_file(std::string(DEFERLAB_SOURCE_DIR) + "/README.md");
  if (readme.find("absolute accuracies") == std::string::npos) {
    return {false, "README.md lacks the scale-limitation note"};
  }
  return {true,
          "image-benchmark absolute accuracies are out of scope at desk scale; the suite checks "
          "exact constructions and synthetic trends instead (documented in README.md)"};
#else
  return {false, "source dir not configured"};
#endif
}

}  // namespace

int main() {
  std::cout << "acceptance gate: 10 criteria\n";
  criterion(1, "exhaustive staged vs joint gap on adversarial worlds is exact", 1.0,
            exact_adversarial_gaps);
  criterion(2, "staged-joint gap respects the capacity-ratio bound on random worlds", 60.0,
            random_world_gap_bound);
  criterion(3, "decoded surrogate minimizer matches the Bayes action everywhere", 30.0,
            consistency_everywhere);
  criterion(4, "calibration inequality holds on 10^4 random trials", 60.0,
            calibration_inequality);
  criterion(5, "analytic surrogate gradient matches central differences", 5.0,
            gradient_agreement);
  criterion(6, "disagreement mass stays near 0.5 on the stall world", 30.0,
            stall_world_dis_mass);
  criterion(7, "two-stage active learner beats passive joint at every label budget", 600.0,
            label_budget_curve);
  criterion(8, "staged beats joint at small labeled fractions; semisupervised in between", 600.0,
            labeled_fraction_tradeoff);
  criterion(9, "experiment CSVs are byte-identical across reruns", 120.0, byte_identical_reruns);
  criterion(10, "desk-scale fidelity note is present", 5.0, scale_limits_documented);

  if (g_failures == 0) {
    std::cout << "acceptance: ALL 10 CRITERIA PASS\n";
    return 0;
  }
  std::cout << "acceptance: " << g_failures << " criteria FAILED\n";
  return 1;
}
