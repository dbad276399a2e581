#pragma once

// Experiment drivers: seeded multi-trial sweeps with deterministic per-trial
// seeds, ordered parallel collection, CSV/JSON emission, and the five
// verification suites. Each experiment exists twice: a typed entry point
// (parameters struct in, rows out) used by tests, and a config-driven wrapper
// used by the CLI.

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "deferlab/active.hpp"
#include "deferlab/config.hpp"
#include "deferlab/core.hpp"
#include "deferlab/surrogates.hpp"

namespace deferlab {

// Evaluate fn(0..n-1) on a worker pool and return results in index order;
// with one worker this degenerates to a sequential loop, and the output is
// identical either way. The first exception thrown by any worker is
// rethrown after all workers finish.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t n, int threads, Fn&& fn) {
  std::vector<T> results(n);
  if (n == 0) return results;
  unsigned workers = threads > 0 ? static_cast<unsigned>(threads)
                                 : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) results[i] = fn(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        results[i] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

double mean_of(const std::vector<double>& v);
// Standard error of the mean (sample standard deviation / sqrt(n); 0 for n < 2).
double stderr_of(const std::vector<double>& v);

// Shared trace schema for active-learning runs.
std::string trace_to_csv(const std::vector<RoundRow>& rows);

// ---- model complexity sweep -------------------------------------------------

struct ModelComplexityParams {
  std::string world = "theorem1";  // "theorem1" (exact gaps) or "random_atomic"
  double eps = 0.1;
  std::vector<int> d_list = {1, 2, 3, 4};
  int rejector_capacity = 1;
  std::size_t support_size = 6;  // random_atomic mode
  int trials = 200;              // random_atomic mode: worlds per d
  std::uint64_t seed = 0;
  int threads = 0;
};

struct ModelComplexityRow {
  int class_size = 0;  // classifier capacity d
  double gap_mean = 0.0;
  double gap_stderr = 0.0;
};

struct ModelComplexityResult {
  std::vector<ModelComplexityRow> rows;
  // Random mode: trials where staged-joint gap exceeded d(R)/d(H) + 1e-9.
  std::uint64_t bound_violations = 0;
  double max_bound_excess = 0.0;
};

ModelComplexityResult model_complexity_sweep(const ModelComplexityParams& params);

// ---- labeled-fraction tradeoff ---------------------------------------------

struct TradeoffParams {
  int n_total = 2000;
  std::vector<double> fractions = {0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0};
  int trials = 20;
  std::uint64_t seed = 0;
  int threads = 0;
  std::size_t grid_cells = 10000;  // exact-risk discretization of the world
  std::string model = "linear";    // or "mlp"
  int hidden = 8;
  double learning_rate = 2.0;
  int epochs = 1500;
  int batch_size = 1 << 30;
  double weight_init_scale = 0.1;
};

struct TradeoffRow {
  double fraction = 0.0;
  double staged_risk = 0.0;
  double joint_risk = 0.0;
  double joint_semisup_risk = 0.0;
  double max_stderr = 0.0;  // max standard error across the three methods
};

struct TradeoffResult {
  std::vector<TradeoffRow> rows;
  std::uint64_t diverged_trials = 0;  // trial-method runs that raised DivergenceError
};

TradeoffResult data_tradeoff_sweep(const TradeoffParams& params);

// ---- active-learning label-budget curve --------------------------------------

struct DodCurveParams {
  int rounds = 8;
  int queries_per_round = 10;
  std::size_t n_u = 500;            // stage-2 unlabeled samples
  std::size_t n_test = 1000;        // fresh test samples per trial
  std::size_t staged_unlabeled = 100;
  int class_size = 100;             // thresholds per class
  int trials = 200;
  std::uint64_t seed = 0;
  int threads = 0;
  std::int64_t budget_cap = 100000;
  std::size_t dis_mc = 2000;
  bool emit_traces = false;
};

struct DodCurveRow {
  std::int64_t human_labels_used = 0;  // nominal budget (DoD may consume fewer)
  double dod_risk = 0.0;
  double staged_risk = 0.0;
  double joint_risk = 0.0;
  double max_stderr = 0.0;  // max standard error across the three methods
};

struct DodCurveResult {
  std::vector<DodCurveRow> rows;
  std::uint64_t inconsistent_trials = 0;  // no zero-violation triple in stage 2
  std::uint64_t collapsed_trials = 0;     // predictor version space would have emptied
  std::vector<std::string> trace_csvs;    // per trial, when emit_traces is set
};

DodCurveResult dod_curve_sweep(const DodCurveParams& params);

// ---- verification suites ------------------------------------------------------

struct SuiteReport {
  std::string name;
  VerifyReport report;
  bool pass = false;
};

SuiteReport consistency_suite(int worlds, std::uint64_t seed);
SuiteReport calibration_suite(std::uint64_t total_trials, std::uint64_t seed);
SuiteReport gradient_suite(std::uint64_t checks, std::uint64_t seed, bool mutate_sign);
// Rejector-disagreement trace on the two-point stall world; violations count
// rounds whose Monte-Carlo DIS mass leaves [0.45, 0.55]. The trace CSV is
// returned through *trace_csv when non-null.
SuiteReport cal_failure_suite(int rounds, int queries_per_round, std::size_t dis_mc,
                              std::uint64_t seed, std::string* trace_csv = nullptr);
// Exact staged/joint risks on the adversarial worlds for each d, plus the
// staged-joint gap bound on random worlds.
SuiteReport theorem1_suite(double eps, const std::vector<int>& d_list, int random_worlds,
                           std::size_t support_size, std::uint64_t seed);

// Default-parameter bundle for running every suite at once (the CLI `verify`
// command); per-suite seeds are derived from `seed`.
struct VerifyParams {
  int consistency_worlds = 100;
  std::uint64_t calibration_trials = 10000;
  std::uint64_t gradient_checks = 100;
  bool mutate_gradient_sign = false;
  int cal_rounds = 100;
  int cal_queries_per_round = 5;
  std::size_t cal_dis_mc = 10000;
  double theorem1_eps = 0.1;
  std::vector<int> theorem1_d_list = {1, 2, 3};
  int theorem1_random_worlds = 200;
  std::size_t theorem1_support = 6;
  std::uint64_t seed = 0;
};

std::vector<SuiteReport> run_verifications(const VerifyParams& params);

std::string suites_to_json(const std::vector<SuiteReport>& suites);

// ---- CSV rendering -----------------------------------------------------------

std::string model_complexity_csv(const ModelComplexityResult& r);
std::string data_tradeoff_csv(const TradeoffResult& r);
std::string dod_curve_csv(const DodCurveResult& r);

// gnuplot variant of a CSV: '#'-prefixed header, whitespace separated.
std::string csv_to_gnuplot(const std::string& csv);

// ---- config-driven entry point -------------------------------------------------

// Parses, dispatches on `experiment`, writes outputs under output_dir, and
// prints one summary line per artifact to stdout. Returns the process exit
// code (0 ok, 1 verification failure, 2 config error, 3 runtime error) —
// exceptions are mapped, not thrown.
int run_experiment_text(const std::string& config_text);
int run_experiment_file(const std::string& path);

}  // namespace deferlab
