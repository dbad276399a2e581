#include "deferlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "deferlab/active.hpp"
#include "deferlab/errors.hpp"
#include "deferlab/hypotheses.hpp"
#include "deferlab/io.hpp"
#include "deferlab/learners.hpp"
#include "deferlab/rng.hpp"
#include "deferlab/worlds.hpp"

namespace deferlab {

double mean_of(const std::vector<double>& v) {
  if (v.empty()) throw EmptyDataError("mean of an empty vector");
  double total = 0.0;
  for (double x : v) total += x;
  return total / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return sd / std::sqrt(static_cast<double>(v.size()));
}

std::string trace_to_csv(const std::vector<RoundRow>& rows) {
  std::ostringstream out;
  out << "round,labels_used,version_space_size,dis_mass_estimate,exact_risk\n";
  for (const RoundRow& r : rows) {
    out << r.round << "," << r.labels_used << "," << r.version_space_size << ","
        << format_double(r.dis_mass_estimate) << "," << format_double(r.exact_risk) << "\n";
  }
  return out.str();
}

// ---- model complexity ---------------------------------------------------------

namespace {

std::vector<double> random_cuts(int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> cuts(static_cast<std::size_t>(count));
  for (double& c : cuts) c = rng.uniform01();
  return cuts;
}

}  // namespace

ModelComplexityResult model_complexity_sweep(const ModelComplexityParams& params) {
  if (params.d_list.empty()) throw ConfigError("model_complexity needs a non-empty d_list");
  if (params.rejector_capacity < 0) throw ConfigError("rejector_capacity must be non-negative");
  ModelComplexityResult result;

  if (params.world == "theorem1") {
    // Deterministic adversarial worlds: one exact gap per d, no spread.
    for (int d : params.d_list) {
      const std::vector<Vec> support = theorem1_support(d);
      const FiniteClass classH = make_support_bounded_class(support, d, 2, 1);
      const FiniteClass classR = make_support_bounded_class(support, params.rejector_capacity, 1, 0);
      const AtomicWorld world = make_theorem1_world(d, params.eps, classH);
      const ErmPairResult staged = staged_erm_exact(classH, classR, world);
      const ErmPairResult joint = joint_erm_exact(classH, classR, world);
      result.rows.push_back({d, staged.risk - joint.risk, 0.0});
    }
    return result;
  }

  if (params.world != "random_atomic") {
    throw ConfigError("model_complexity world must be theorem1 or random_atomic");
  }
  for (int d : params.d_list) {
    if (d < 1) throw ConfigError("d values must be positive");
    const int d_r = std::min(params.rejector_capacity, d);  // keep d(R) <= d(H)
    const double bound = static_cast<double>(d_r) / static_cast<double>(d) + 1e-9;
    struct TrialOut {
      double gap = 0.0;
      double excess = 0.0;
    };
    auto gaps = parallel_map<TrialOut>(
        static_cast<std::size_t>(params.trials), params.threads, [&](std::size_t t) {
          const std::uint64_t world_seed =
              hash_seed(hash_seed(params.seed, static_cast<std::uint64_t>(d)), t);
          const AtomicWorld world = random_atomic_world(params.support_size, 2, world_seed);
          const FiniteClass classH = make_support_bounded_class(world.points, d, 2, 1);
          const FiniteClass classR = make_support_bounded_class(world.points, d_r, 1, 0);
          const ErmPairResult staged = staged_erm_exact(classH, classR, world);
          const ErmPairResult joint = joint_erm_exact(classH, classR, world);
          TrialOut out;
          out.gap = staged.risk - joint.risk;
          out.excess = out.gap - bound;
          return out;
        });
    std::vector<double> values;
    values.reserve(gaps.size());
    for (const TrialOut& g : gaps) {
      values.push_back(g.gap);
      if (g.excess > 0.0) {
        ++result.bound_violations;
        result.max_bound_excess = std::max(result.max_bound_excess, g.excess);
      }
    }
    result.rows.push_back({d, mean_of(values), stderr_of(values)});
  }
  return result;
}

// ---- data tradeoff --------------------------------------------------------------

namespace {

ScoreModel make_model(const TradeoffParams& params, int heads) {
  if (params.model == "linear") return ScoreModel::make_linear(1, heads);
  if (params.model == "mlp") return ScoreModel::make_mlp(1, params.hidden, heads);
  throw ConfigError("train model must be linear or mlp");
}

}  // namespace

TradeoffResult data_tradeoff_sweep(const TradeoffParams& params) {
  if (params.fractions.empty()) throw ConfigError("data_tradeoff needs a non-empty fraction list");
  for (double f : params.fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("fractions must lie in (0, 1]");
  }
  if (params.n_total < 2) throw ConfigError("n_total must be at least 2");

  const ContinuousWorld fig4 = make_fig4_world();
  const AtomicWorld grid = fig4_grid_world(params.grid_cells);

  struct TrialOut {
    std::vector<double> staged, joint, jss;  // one entry per fraction; NaN = diverged
    std::uint64_t diverged = 0;
  };

  auto trials = parallel_map<TrialOut>(
      static_cast<std::size_t>(params.trials), params.threads, [&](std::size_t t) {
        const std::uint64_t seed_t = hash_seed(params.seed, t);
        const WorldView view(fig4);
        const std::vector<Sample> full =
            sample_labeled(view, static_cast<std::size_t>(params.n_total), hash_seed(seed_t, 1));

        TrialOut out;
        for (std::size_t fi = 0; fi < params.fractions.size(); ++fi) {
          const double frac = params.fractions[fi];
          std::size_t n_l = static_cast<std::size_t>(
              std::llround(frac * static_cast<double>(params.n_total)));
          n_l = std::min<std::size_t>(std::max<std::size_t>(n_l, 1), full.size());

          std::vector<Sample> data_l(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(n_l));
          std::vector<Sample> data_u;
          data_u.reserve(full.size() - n_l);
          for (std::size_t i = n_l; i < full.size(); ++i) {
            Sample s = full[i];
            s.m.reset();
            data_u.push_back(std::move(s));
          }
          std::vector<Sample> data_all = data_l;
          data_all.insert(data_all.end(), data_u.begin(), data_u.end());

          TrainConfig cfg;
          cfg.learning_rate = params.learning_rate;
          cfg.epochs = params.epochs;
          cfg.batch_size = params.batch_size;
          cfg.weight_init_scale = params.weight_init_scale;

          auto run_method = [&](int tag, auto&& fn, std::vector<double>& sink) {
            cfg.seed = hash_seed(seed_t, 100 + 10 * fi + static_cast<std::uint64_t>(tag));
            try {
              sink.push_back(fn());
            } catch (const DivergenceError&) {
              sink.push_back(std::numeric_limits<double>::quiet_NaN());
              ++out.diverged;
            }
          };

          run_method(0, [&] {
            const StagedResult staged = train_staged(make_model(params, 2),
                                                     ScoreModel::make_linear(1, 1), data_all,
                                                     data_l, cfg);
            return exact_deferral_risk(staged.system, grid);
          }, out.staged);
          run_method(1, [&] {
            const TrainResult joint = train_joint(make_model(params, 3), data_l, cfg);
            return exact_deferral_risk(decode_model(joint.model), grid);
          }, out.joint);
          run_method(2, [&] {
            const TrainResult jss =
                data_u.empty() ? train_joint(make_model(params, 3), data_l, cfg)
                               : train_joint_semisupervised(make_model(params, 3), data_u, data_l, cfg);
            return exact_deferral_risk(decode_model(jss.model), grid);
          }, out.jss);
        }
        return out;
      });

  TradeoffResult result;
  for (std::size_t fi = 0; fi < params.fractions.size(); ++fi) {
    std::vector<double> staged, joint, jss;
    for (const TrialOut& t : trials) {
      if (std::isfinite(t.staged[fi])) staged.push_back(t.staged[fi]);
      if (std::isfinite(t.joint[fi])) joint.push_back(t.joint[fi]);
      if (std::isfinite(t.jss[fi])) jss.push_back(t.jss[fi]);
    }
    if (staged.empty() || joint.empty() || jss.empty()) {
      throw DivergenceError("every trial diverged at one labeled fraction");
    }
    TradeoffRow row;
    row.fraction = params.fractions[fi];
    row.staged_risk = mean_of(staged);
    row.joint_risk = mean_of(joint);
    row.joint_semisup_risk = mean_of(jss);
    row.max_stderr = std::max({stderr_of(staged), stderr_of(joint), stderr_of(jss)});
    result.rows.push_back(row);
  }
  for (const TrialOut& t : trials) result.diverged_trials += t.diverged;
  return result;
}

// ---- dod curve ------------------------------------------------------------------

DodCurveResult dod_curve_sweep(const DodCurveParams& params) {
  if (params.rounds < 1 || params.queries_per_round < 1) {
    throw ConfigError("dod_curve needs positive rounds and queries_per_round");
  }
  if (params.class_size < 2) throw ConfigError("dod_curve needs at least two thresholds per class");

  const ContinuousWorld fig4 = make_fig4_world();
  const AtomicWorld grid = params.emit_traces ? fig4_grid_world(10000) : AtomicWorld{};

  struct TrialOut {
    std::vector<double> dod, staged, joint;  // indexed by budget row (0..rounds)
    bool inconsistent = false;
    bool collapsed = false;
    std::string trace;
  };

  auto trials = parallel_map<TrialOut>(
      static_cast<std::size_t>(params.trials), params.threads, [&](std::size_t t) {
        const std::uint64_t seed_t = hash_seed(params.seed, t);
        const WorldView view(fig4);

        const FiniteClass classH =
            make_threshold_class(random_cuts(params.class_size, hash_seed(seed_t, 1)), true, 2, 1);
        // Rejectors defer at and below their cut; defer predictors fire above.
        const FiniteClass classR =
            make_threshold_class(random_cuts(params.class_size, hash_seed(seed_t, 2)), false, 1, 0);
        const FiniteClass classD =
            make_threshold_class(random_cuts(params.class_size, hash_seed(seed_t, 3)), true, 1, 0);

        const std::vector<Sample> test = sample_labeled(view, params.n_test, hash_seed(seed_t, 4));

        ActiveOptions opts;
        opts.budget_cap = params.budget_cap;
        opts.dis_mc = params.dis_mc;
        if (params.emit_traces) {
          opts.risk_fn = [&grid](const DeferralSystem& sys) {
            return exact_deferral_risk(sys, grid);
          };
        }
        const DodResult dod = dod_run(classD, classH, classR, view, params.rounds,
                                      params.queries_per_round, params.n_u, hash_seed(seed_t, 5),
                                      opts);

        const std::vector<Sample> stream = sample_labeled(
            view,
            static_cast<std::size_t>(params.rounds) *
                static_cast<std::size_t>(params.queries_per_round),
            hash_seed(seed_t, 6));
        const std::vector<Sample> s_u =
            sample_unlabeled(view, params.staged_unlabeled, hash_seed(seed_t, 7));

        const std::size_t h0 = erm_classifier(classH, s_u);
        const auto h0_fn = classH.member_fn(h0);
        const DeferralSystem never_defer{h0_fn, [](const Vec&) { return 0; }};

        TrialOut out;
        const double risk0 = deferral_loss_01(never_defer, test);
        out.dod.push_back(risk0);
        out.staged.push_back(risk0);
        out.joint.push_back(risk0);

        for (int r = 1; r <= params.rounds; ++r) {
          const std::size_t sel_idx =
              std::min<std::size_t>(static_cast<std::size_t>(r), dod.per_round.size()) - 1;
          const DodSelection& sel = dod.per_round[sel_idx];
          out.dod.push_back(deferral_loss_01(
              make_system(classH, sel.h_index, classR, sel.r_index), test));

          const std::size_t b = static_cast<std::size_t>(r) *
                                static_cast<std::size_t>(params.queries_per_round);
          const std::vector<Sample> data_b(stream.begin(),
                                           stream.begin() + static_cast<std::ptrdiff_t>(b));
          const std::size_t r_hat = erm_rejector(classR, h0_fn, data_b);
          out.staged.push_back(
              deferral_loss_01(make_system(classH, h0, classR, r_hat), test));
          const auto [hj, rj] = erm_joint(classH, classR, data_b);
          out.joint.push_back(deferral_loss_01(make_system(classH, hj, classR, rj), test));
        }

        out.inconsistent = !dod.selection.consistent;
        out.collapsed = dod.version_space_collapsed;
        if (params.emit_traces) out.trace = trace_to_csv(dod.trace);
        return out;
      });

  DodCurveResult result;
  for (int r = 0; r <= params.rounds; ++r) {
    std::vector<double> dod, staged, joint;
    for (const TrialOut& t : trials) {
      dod.push_back(t.dod[static_cast<std::size_t>(r)]);
      staged.push_back(t.staged[static_cast<std::size_t>(r)]);
      joint.push_back(t.joint[static_cast<std::size_t>(r)]);
    }
    DodCurveRow row;
    row.human_labels_used = static_cast<std::int64_t>(r) * params.queries_per_round;
    row.dod_risk = mean_of(dod);
    row.staged_risk = mean_of(staged);
    row.joint_risk = mean_of(joint);
    row.max_stderr = std::max({stderr_of(dod), stderr_of(staged), stderr_of(joint)});
    result.rows.push_back(row);
  }
  for (const TrialOut& t : trials) {
    if (t.inconsistent) ++result.inconsistent_trials;
    if (t.collapsed) ++result.collapsed_trials;
    if (params.emit_traces) result.trace_csvs.push_back(t.trace);
  }
  return result;
}

// ---- verification suites ----------------------------------------------------------

SuiteReport consistency_suite(int worlds, std::uint64_t seed) {
  SuiteReport out;
  out.name = "consistency";
  out.report.seed = seed;
  for (int w = 0; w < worlds; ++w) {
    const int K = (w % 2 == 0) ? 2 : 3;
    const std::size_t support = 2 + static_cast<std::size_t>(w % 4);  // 2..5
    const AtomicWorld world =
        random_atomic_world(support, K, hash_seed(seed, static_cast<std::uint64_t>(w)));
    const VerifyReport rep = verify_consistency(world);
    out.report.trials += rep.trials;
    out.report.violations += rep.violations;
    out.report.max_violation = std::max(out.report.max_violation, rep.max_violation);
  }
  out.pass = (out.report.violations == 0);
  return out;
}

SuiteReport calibration_suite(std::uint64_t total_trials, std::uint64_t seed) {
  SuiteReport out;
  out.name = "calibration";
  out.report.seed = seed;
  static constexpr int kClassCounts[] = {2, 3, 10};
  for (int i = 0; i < 3; ++i) {
    const std::uint64_t n = total_trials / 3 + (static_cast<std::uint64_t>(i) < total_trials % 3 ? 1 : 0);
    const VerifyReport rep =
        verify_calibration(n, hash_seed(seed, static_cast<std::uint64_t>(kClassCounts[i])),
                           kClassCounts[i], 1.0);
    out.report.trials += rep.trials;
    out.report.violations += rep.violations;
    out.report.max_violation = std::max(out.report.max_violation, rep.max_violation);
  }
  out.pass = (out.report.violations == 0);
  return out;
}

SuiteReport gradient_suite(std::uint64_t checks, std::uint64_t seed, bool mutate_sign) {
  SuiteReport out;
  out.name = "gradient_check";
  out.report = verify_gradient(checks, seed, 1e-5, 1e-5, mutate_sign);
  out.pass = (out.report.violations == 0);
  return out;
}

SuiteReport cal_failure_suite(int rounds, int queries_per_round, std::size_t dis_mc,
                              std::uint64_t seed, std::string* trace_csv) {
  SuiteReport out;
  out.name = "cal_failure";
  out.report.seed = seed;

  const CalCounterexample cal = make_cal_counterexample_world();
  const WorldView view(cal.world);
  ActiveOptions opts;
  opts.dis_mc = dis_mc;
  opts.risk_fn = [&cal](const DeferralSystem& sys) { return exact_deferral_risk(sys, cal.world); };
  const PairRunResult run = rejector_disagreement_run(cal.classH, cal.classR, view,
                                                      queries_per_round, rounds, seed, opts);
  for (const RoundRow& row : run.trace) {
    ++out.report.trials;
    const double excess = std::abs(row.dis_mass_estimate - 0.5) - 0.05;
    if (excess > 0.0) {
      ++out.report.violations;
      out.report.max_violation = std::max(out.report.max_violation, excess);
    }
  }
  // The disagreement region never shrinks here, so every round must complete.
  out.pass = (out.report.violations == 0) &&
             (run.trace.size() == static_cast<std::size_t>(rounds)) && !run.budget_exhausted;
  if (trace_csv) *trace_csv = trace_to_csv(run.trace);
  return out;
}

SuiteReport theorem1_suite(double eps, const std::vector<int>& d_list, int random_worlds,
                           std::size_t support_size, std::uint64_t seed) {
  SuiteReport out;
  out.name = "theorem1";
  out.report.seed = seed;

  for (int d : d_list) {
    ++out.report.trials;
    const std::vector<Vec> support = theorem1_support(d);
    const FiniteClass classH = make_support_bounded_class(support, d, 2, 1);
    const FiniteClass classR = make_support_bounded_class(support, 1, 1, 0);
    const AtomicWorld world = make_theorem1_world(d, eps, classH);
    const ErmPairResult staged = staged_erm_exact(classH, classR, world);
    const ErmPairResult joint = joint_erm_exact(classH, classR, world);
    const double expected = (1.0 - eps) / static_cast<double>(d + 1);
    const double dev = std::max(std::abs(staged.risk - expected), std::abs(joint.risk));
    if (std::abs(staged.risk - expected) > 1e-12 || joint.risk != 0.0) {
      ++out.report.violations;
      out.report.max_violation = std::max(out.report.max_violation, dev);
    }
  }

  for (int t = 0; t < random_worlds; ++t) {
    ++out.report.trials;
    const int d_h = 1 + (t % 3);
    const int d_r = 1 + (t % d_h);
    const AtomicWorld world =
        random_atomic_world(support_size, 2, hash_seed(seed, 0x7E0 + static_cast<std::uint64_t>(t)));
    const FiniteClass classH = make_support_bounded_class(world.points, d_h, 2, 1);
    const FiniteClass classR = make_support_bounded_class(world.points, d_r, 1, 0);
    const ErmPairResult staged = staged_erm_exact(classH, classR, world);
    const ErmPairResult joint = joint_erm_exact(classH, classR, world);
    const double gap = staged.risk - joint.risk;
    const double bound = static_cast<double>(d_r) / static_cast<double>(d_h) + 1e-9;
    if (gap > bound) {
      ++out.report.violations;
      out.report.max_violation = std::max(out.report.max_violation, gap - bound);
    }
  }
  out.pass = (out.report.violations == 0);
  return out;
}

std::vector<SuiteReport> run_verifications(const VerifyParams& params) {
  std::vector<SuiteReport> suites;
  suites.push_back(consistency_suite(params.consistency_worlds, hash_seed(params.seed, 1)));
  suites.push_back(calibration_suite(params.calibration_trials, hash_seed(params.seed, 2)));
  suites.push_back(
      gradient_suite(params.gradient_checks, hash_seed(params.seed, 3), params.mutate_gradient_sign));
  suites.push_back(cal_failure_suite(params.cal_rounds, params.cal_queries_per_round,
                                     params.cal_dis_mc, hash_seed(params.seed, 4)));
  suites.push_back(theorem1_suite(params.theorem1_eps, params.theorem1_d_list,
                                  params.theorem1_random_worlds, params.theorem1_support,
                                  hash_seed(params.seed, 5)));
  return suites;
}

std::string suites_to_json(const std::vector<SuiteReport>& suites) {
  nlohmann::json j;
  bool all_pass = true;
  for (const SuiteReport& s : suites) {
    j["suites"][s.name] = {
        {"trials", s.report.trials},
        {"violations", s.report.violations},
        {"max_violation", s.report.max_violation},
        {"seed", s.report.seed},
        {"pass", s.pass},
    };
    all_pass = all_pass && s.pass;
  }
  j["all_pass"] = all_pass;
  return j.dump(2) + "\n";
}

// ---- CSV rendering ------------------------------------------------------------------

std::string model_complexity_csv(const ModelComplexityResult& r) {
  std::ostringstream out;
  out << "classifier_class_size,joint_minus_staged_accuracy_gap,stderr\n";
  for (const ModelComplexityRow& row : r.rows) {
    out << row.class_size << "," << format_double(row.gap_mean) << ","
        << format_double(row.gap_stderr) << "\n";
  }
  return out.str();
}

std::string data_tradeoff_csv(const TradeoffResult& r) {
  std::ostringstream out;
  out << "labeled_fraction,staged_risk,joint_risk,joint_semisup_risk,stderr\n";
  for (const TradeoffRow& row : r.rows) {
    out << format_double(row.fraction) << "," << format_double(row.staged_risk) << ","
        << format_double(row.joint_risk) << "," << format_double(row.joint_semisup_risk) << ","
        << format_double(row.max_stderr) << "\n";
  }
  return out.str();
}

std::string dod_curve_csv(const DodCurveResult& r) {
  std::ostringstream out;
  out << "human_labels_used,dod_risk,staged_risk,joint_risk,stderr\n";
  for (const DodCurveRow& row : r.rows) {
    out << row.human_labels_used << "," << format_double(row.dod_risk) << ","
        << format_double(row.staged_risk) << "," << format_double(row.joint_risk) << ","
        << format_double(row.max_stderr) << "\n";
  }
  return out.str();
}

std::string csv_to_gnuplot(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    if (first) {
      out << "# " << line << "\n";
      first = false;
    } else {
      out << line << "\n";
    }
  }
  return out.str();
}

// ---- config-driven entry point ---------------------------------------------------------

namespace {

int default_trials_for(const std::string& experiment) {
  if (experiment == "model_complexity") return 200;
  if (experiment == "data_tradeoff") return 20;
  if (experiment == "dod_curve") return 200;
  return 1;
}

std::string out_path(const ExperimentConfig& exp, const std::string& name) {
  return exp.output_dir + "/" + name;
}

void emit_csv(const ExperimentConfig& exp, const std::string& name, const std::string& csv) {
  const std::string path = out_path(exp, name + ".csv");
  write_text_file(path, csv);
  std::cout << "wrote " << path << "\n";
  if (exp.emit_gnuplot) {
    const std::string dat = out_path(exp, name + ".dat");
    write_text_file(dat, csv_to_gnuplot(csv));
    std::cout << "wrote " << dat << "\n";
  }
}

int dispatch_experiment(Config& cfg) {
  const std::string experiment = cfg.require_string("experiment");
  const ExperimentConfig exp = read_experiment_config(cfg, default_trials_for(experiment));

  if (experiment == "model_complexity") {
    ModelComplexityParams p;
    p.world = cfg.get_string("world.world", "theorem1");
    p.eps = cfg.get_double("world.eps", 0.1);
    p.support_size = static_cast<std::size_t>(cfg.get_int("world.support_size", 6));
    p.d_list = cfg.get_int_list("classes.d_list", {1, 2, 3, 4});
    p.rejector_capacity = cfg.get_int("classes.rejector_capacity", 1);
    p.trials = exp.trials;
    p.seed = exp.seed;
    p.threads = exp.threads;
    cfg.finish();
    const ModelComplexityResult r = model_complexity_sweep(p);
    emit_csv(exp, "model_complexity", model_complexity_csv(r));
    if (p.world == "random_atomic") {
      std::cout << "gap bound violations: " << r.bound_violations << "\n";
    }
    return 0;
  }

  if (experiment == "data_tradeoff") {
    const std::string world = cfg.get_string("world.world", "fig4");
    if (world != "fig4") throw ConfigError("data_tradeoff runs on the fig4 world");
    TradeoffParams p;
    p.grid_cells = static_cast<std::size_t>(cfg.get_int("world.grid_cells", 10000));
    p.n_total = cfg.get_int("data.n_total", 2000);
    p.fractions = cfg.get_double_list("data.fractions", p.fractions);
    p.model = cfg.get_string("train.model", "linear");
    p.hidden = cfg.get_int("train.hidden", 8);
    p.learning_rate = cfg.get_double("train.learning_rate", p.learning_rate);
    p.epochs = cfg.get_int("train.epochs", p.epochs);
    p.batch_size = cfg.get_int("train.batch_size", p.batch_size);
    p.weight_init_scale = cfg.get_double("train.weight_init_scale", p.weight_init_scale);
    p.trials = exp.trials;
    p.seed = exp.seed;
    p.threads = exp.threads;
    cfg.finish();
    const TradeoffResult r = data_tradeoff_sweep(p);
    emit_csv(exp, "data_tradeoff", data_tradeoff_csv(r));
    if (r.diverged_trials > 0) {
      std::cout << "diverged trial-methods: " << r.diverged_trials << "\n";
    }
    return 0;
  }

  if (experiment == "dod_curve") {
    const std::string world = cfg.get_string("world.world", "fig4");
    if (world != "fig4") throw ConfigError("dod_curve runs on the fig4 world");
    DodCurveParams p;
    p.class_size = cfg.get_int("classes.num_members", 100);
    p.rounds = cfg.get_int("active.rounds", p.rounds);
    p.queries_per_round = cfg.get_int("active.queries_per_round", p.queries_per_round);
    p.n_u = static_cast<std::size_t>(cfg.get_int("active.n_u", 500));
    p.n_test = static_cast<std::size_t>(cfg.get_int("active.n_test", 1000));
    p.staged_unlabeled = static_cast<std::size_t>(cfg.get_int("active.staged_unlabeled", 100));
    p.budget_cap = cfg.get_int("active.budget_cap", 100000);
    p.dis_mc = static_cast<std::size_t>(cfg.get_int("active.dis_mc", 2000));
    p.emit_traces = cfg.get_bool("active.emit_traces", false);
    p.trials = exp.trials;
    p.seed = exp.seed;
    p.threads = exp.threads;
    cfg.finish();
    const DodCurveResult r = dod_curve_sweep(p);
    emit_csv(exp, "dod_curve", dod_curve_csv(r));
    std::cout << "inconsistent trials: " << r.inconsistent_trials
              << ", collapsed trials: " << r.collapsed_trials << "\n";
    if (p.emit_traces) {
      for (std::size_t t = 0; t < r.trace_csvs.size(); ++t) {
        const std::string path = out_path(exp, "traces/trial_" + std::to_string(t) + ".csv");
        write_text_file(path, r.trace_csvs[t]);
      }
      std::cout << "wrote " << r.trace_csvs.size() << " trace files under "
                << out_path(exp, "traces") << "\n";
    }
    return 0;
  }

  if (experiment == "cal_failure") {
    const std::string world = cfg.get_string("world.world", "cal_counterexample");
    if (world != "cal_counterexample") {
      throw ConfigError("cal_failure runs on the cal_counterexample world");
    }
    const int rounds = cfg.get_int("active.rounds", 100);
    const int k = cfg.get_int("active.queries_per_round", 5);
    const std::size_t dis_mc = static_cast<std::size_t>(cfg.get_int("active.dis_mc", 10000));
    cfg.finish();
    std::string trace;
    const SuiteReport suite = cal_failure_suite(rounds, k, dis_mc, exp.seed, &trace);
    const std::string trace_path = out_path(exp, "cal_failure_trace.csv");
    write_text_file(trace_path, trace);
    std::cout << "wrote " << trace_path << "\n";
    const std::string json_path = out_path(exp, "cal_failure.json");
    write_text_file(json_path, suites_to_json({suite}));
    std::cout << "wrote " << json_path << "\n";
    std::cout << "cal_failure: " << (suite.pass ? "PASS" : "FAIL") << "\n";
    return suite.pass ? 0 : 1;
  }

  if (experiment == "theorem1") {
    const double eps = cfg.get_double("world.eps", 0.1);
    const std::size_t support = static_cast<std::size_t>(cfg.get_int("world.support_size", 6));
    const std::vector<int> d_list = cfg.get_int_list("classes.d_list", {1, 2, 3});
    const int random_worlds = cfg.get_int("verify.theorem1_random_worlds", 200);
    cfg.finish();
    const SuiteReport suite = theorem1_suite(eps, d_list, random_worlds, support, exp.seed);
    const std::string path = out_path(exp, "theorem1.json");
    write_text_file(path, suites_to_json({suite}));
    std::cout << "wrote " << path << "\n";
    std::cout << "theorem1: " << (suite.pass ? "PASS" : "FAIL") << "\n";
    return suite.pass ? 0 : 1;
  }

  if (experiment == "verify_consistency") {
    const std::string world = cfg.get_string("world.world", "random");
    SuiteReport suite;
    if (world == "custom_atomic") {
      const std::string path = cfg.require_string("world.path");
      cfg.finish();
      suite.name = "consistency";
      suite.report = verify_consistency(load_atomic_world_json(path));
      suite.report.seed = exp.seed;
      suite.pass = (suite.report.violations == 0);
    } else if (world == "random") {
      const int worlds = cfg.get_int("verify.consistency_worlds", 100);
      cfg.finish();
      suite = consistency_suite(worlds, exp.seed);
    } else {
      throw ConfigError("verify_consistency world must be random or custom_atomic");
    }
    const std::string path = out_path(exp, "verify_consistency.json");
    write_text_file(path, suites_to_json({suite}));
    std::cout << "wrote " << path << "\n";
    std::cout << "consistency: " << (suite.pass ? "PASS" : "FAIL") << "\n";
    return suite.pass ? 0 : 1;
  }

  if (experiment == "verify_calibration") {
    const std::uint64_t trials = cfg.get_uint64("verify.calibration_trials", 10000);
    cfg.finish();
    const SuiteReport suite = calibration_suite(trials, exp.seed);
    const std::string path = out_path(exp, "verify_calibration.json");
    write_text_file(path, suites_to_json({suite}));
    std::cout << "wrote " << path << "\n";
    std::cout << "calibration: " << (suite.pass ? "PASS" : "FAIL") << "\n";
    return suite.pass ? 0 : 1;
  }

  if (experiment == "gradient_check") {
    const std::uint64_t checks = cfg.get_uint64("verify.gradient_checks", 100);
    const bool mutate = cfg.get_bool("verify.mutate_gradient_sign", false);
    cfg.finish();
    const SuiteReport suite = gradient_suite(checks, exp.seed, mutate);
    const std::string path = out_path(exp, "gradient_check.json");
    write_text_file(path, suites_to_json({suite}));
    std::cout << "wrote " << path << "\n";
    std::cout << "gradient_check: " << (suite.pass ? "PASS" : "FAIL") << "\n";
    return suite.pass ? 0 : 1;
  }

  throw ConfigError("unknown experiment: " + experiment);
}

}  // namespace

int run_experiment_text(const std::string& config_text) {
  try {
    Config cfg = Config::parse(config_text);
    return dispatch_experiment(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

int run_experiment_file(const std::string& path) {
  try {
    return run_experiment_text(read_text_file(path));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace deferlab
