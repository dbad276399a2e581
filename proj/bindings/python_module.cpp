// Python bindings for the main operations: losses and exact risks, world
// construction and sampling, finite classes with exhaustive ERM, the
// surrogate family and its verification routines, gradient-descent training,
// and the active-learning runs. Heavyweight experiment sweeps stay behind the
// CLI; this surface is meant for exploration and smoke testing.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "deferlab/active.hpp"
#include "deferlab/core.hpp"
#include "deferlab/errors.hpp"
#include "deferlab/harness.hpp"
#include "deferlab/hypotheses.hpp"
#include "deferlab/learners.hpp"
#include "deferlab/rng.hpp"
#include "deferlab/surrogates.hpp"
#include "deferlab/worlds.hpp"

namespace py = pybind11;
using namespace deferlab;

PYBIND11_MODULE(_deferlab, m) {
  m.doc() = "Learning-to-defer machinery: deferral losses, exact ERM, consistent "
            "surrogates, and version-space active learning";

  // ---- core ----------------------------------------------------------------
  py::class_<Sample>(m, "Sample")
      .def(py::init([](Vec x, int y, std::optional<int> mm) {
             Sample s;
             s.x = std::move(x);
             s.y = y;
             s.m = mm;
             return s;
           }),
           py::arg("x"), py::arg("y"), py::arg("m") = std::nullopt)
      .def_readwrite("x", &Sample::x)
      .def_readwrite("y", &Sample::y)
      .def_readwrite("m", &Sample::m)
      .def("__repr__", [](const Sample& s) {
        std::string out = "Sample(x=[";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
          if (i) out += ", ";
          out += std::to_string(s.x[i]);
        }
        out += "], y=" + std::to_string(s.y);
        out += s.m ? ", m=" + std::to_string(*s.m) + ")" : ")";
        return out;
      });

  py::class_<DeferralSystem>(m, "DeferralSystem")
      .def(py::init<>())
      .def_readwrite("h", &DeferralSystem::h)
      .def_readwrite("r", &DeferralSystem::r);

  py::class_<AtomicWorld>(m, "AtomicWorld")
      .def(py::init<>())
      .def_readwrite("num_classes", &AtomicWorld::num_classes)
      .def_readwrite("points", &AtomicWorld::points)
      .def_readwrite("masses", &AtomicWorld::masses)
      .def_readwrite("label_dist", &AtomicWorld::label_dist)
      .def_readwrite("expert_dist", &AtomicWorld::expert_dist)
      .def("support_size", &AtomicWorld::support_size)
      .def("validate", &AtomicWorld::validate);

  m.def("decode_pair", &decode_pair, py::arg("prediction"), py::arg("num_classes"));
  m.def("deferral_loss_01", &deferral_loss_01, py::arg("system"), py::arg("data"));
  m.def("exact_deferral_risk", &exact_deferral_risk, py::arg("system"), py::arg("world"));
  m.def("exact_classification_risk", &exact_classification_risk, py::arg("h"), py::arg("world"));
  m.def("hash_seed", &hash_seed, py::arg("seed"), py::arg("index"));

  // ---- worlds --------------------------------------------------------------
  py::class_<ContinuousWorld>(m, "ContinuousWorld");

  py::class_<WorldView>(m, "WorldView")
      .def(py::init<const ContinuousWorld&>(), py::keep_alive<1, 2>())
      .def(py::init<const AtomicWorld&>(), py::keep_alive<1, 2>())
      .def("num_classes", &WorldView::num_classes)
      .def("is_atomic", &WorldView::is_atomic);

  py::class_<CalCounterexample>(m, "CalCounterexample")
      .def_readonly("world", &CalCounterexample::world)
      .def_readonly("classH", &CalCounterexample::classH)
      .def_readonly("classR", &CalCounterexample::classR);

  m.def("make_fig4_world", &make_fig4_world);
  m.def("fig4_grid_world", &fig4_grid_world, py::arg("cells"));
  m.def("make_theorem1_world", &make_theorem1_world, py::arg("d"), py::arg("eps"),
        py::arg("classH"));
  m.def("theorem1_support", &theorem1_support, py::arg("d"));
  m.def("make_cal_counterexample_world", &make_cal_counterexample_world);
  m.def("random_atomic_world", &random_atomic_world, py::arg("support_size"),
        py::arg("num_classes"), py::arg("seed"));
  m.def("sample_labeled", &sample_labeled, py::arg("world"), py::arg("n"), py::arg("seed"));
  m.def("sample_unlabeled", &sample_unlabeled, py::arg("world"), py::arg("n"), py::arg("seed"));

  // ---- hypotheses ------------------------------------------------------------
  py::class_<FiniteClass>(m, "FiniteClass")
      .def("size", &FiniteClass::size)
      .def("eval", &FiniteClass::eval, py::arg("member"), py::arg("x"))
      .def("member_fn", &FiniteClass::member_fn, py::arg("member"));

  py::class_<ErmPairResult>(m, "ErmPairResult")
      .def_readonly("h_index", &ErmPairResult::h_index)
      .def_readonly("r_index", &ErmPairResult::r_index)
      .def_readonly("risk", &ErmPairResult::risk);

  m.def("make_threshold_class", &make_threshold_class, py::arg("cuts"), py::arg("positive_above"),
        py::arg("positive_output"), py::arg("negative_output"));
  m.def("make_support_bounded_class", &make_support_bounded_class, py::arg("support"),
        py::arg("d"), py::arg("positive_output"), py::arg("negative_output"));
  m.def("make_lookup_class", &make_lookup_class, py::arg("support"), py::arg("tables"));
  m.def("enumerate_lookup_pairs", &enumerate_lookup_pairs, py::arg("world"), py::arg("K"),
        py::arg("max_support") = 6, py::arg("max_classes") = 3);
  m.def("erm_classifier", &erm_classifier, py::arg("classH"), py::arg("data"));
  m.def("erm_rejector", &erm_rejector, py::arg("classR"), py::arg("h"), py::arg("data"));
  m.def("erm_joint", &erm_joint, py::arg("classH"), py::arg("classR"), py::arg("data"),
        py::arg("pair_cap") = 10'000'000ULL);
  m.def("erm_classifier_exact", &erm_classifier_exact, py::arg("classH"), py::arg("world"));
  m.def("erm_rejector_exact", &erm_rejector_exact, py::arg("classR"), py::arg("h"),
        py::arg("world"));
  m.def("erm_joint_exact", &erm_joint_exact, py::arg("classH"), py::arg("classR"),
        py::arg("world"), py::arg("pair_cap") = 10'000'000ULL);
  m.def("staged_erm_exact", &staged_erm_exact, py::arg("classH"), py::arg("classR"),
        py::arg("world"));
  m.def("joint_erm_exact", &joint_erm_exact, py::arg("classH"), py::arg("classR"),
        py::arg("world"), py::arg("pair_cap") = 10'000'000ULL);
  m.def("make_system", &make_system, py::arg("classH"), py::arg("h_index"), py::arg("classR"),
        py::arg("r_index"));

  // ---- surrogates ------------------------------------------------------------
  py::class_<SurrogateSpec>(m, "SurrogateSpec")
      .def_static("cross_entropy", &SurrogateSpec::cross_entropy)
      .def_static("weighted_quadratic", &SurrogateSpec::weighted_quadratic)
      .def_static("ust", &SurrogateSpec::ust, py::arg("u"), py::arg("t"), py::arg("s"));

  py::class_<CalibrationSpec>(m, "CalibrationSpec")
      .def_static("lce", &CalibrationSpec::lce, py::arg("M"), py::arg("K"));

  py::class_<VerifyReport>(m, "VerifyReport")
      .def_readonly("trials", &VerifyReport::trials)
      .def_readonly("violations", &VerifyReport::violations)
      .def_readonly("max_violation", &VerifyReport::max_violation)
      .def_readonly("seed", &VerifyReport::seed);

  m.def("cost_weights", &cost_weights, py::arg("costs"));
  m.def("cost_vector_01", &cost_vector_01, py::arg("y"), py::arg("expert_correct"),
        py::arg("num_classes"));
  m.def("surrogate_loss", &surrogate_loss, py::arg("costs"), py::arg("scores"), py::arg("spec"));
  m.def("lce_loss", &lce_loss, py::arg("y"), py::arg("expert_correct"), py::arg("scores"));
  m.def("lce_gradient", &lce_gradient, py::arg("y"), py::arg("expert_correct"),
        py::arg("scores"));
  m.def("calibration_psi", &calibration_psi, py::arg("x"), py::arg("spec"));
  m.def("bayes_action", &bayes_action, py::arg("expected_costs"));
  m.def("conditional_surrogate_minimizer", &conditional_surrogate_minimizer, py::arg("q"));
  m.def("verify_consistency", &verify_consistency, py::arg("world"));
  m.def("verify_calibration", &verify_calibration, py::arg("n_trials"), py::arg("seed"),
        py::arg("num_classes"), py::arg("M") = 1.0);
  m.def("verify_gradient", &verify_gradient, py::arg("n_checks"), py::arg("seed"),
        py::arg("step") = 1e-5, py::arg("tol") = 1e-5, py::arg("flip_sign") = false);

  // ---- learners --------------------------------------------------------------
  py::class_<ScoreModel>(m, "ScoreModel")
      .def_static("make_linear", &ScoreModel::make_linear, py::arg("in_dim"), py::arg("out_dim"))
      .def_static("make_mlp", &ScoreModel::make_mlp, py::arg("in_dim"), py::arg("hidden"),
                  py::arg("out_dim"))
      .def_readwrite("params", &ScoreModel::params)
      .def("param_count", &ScoreModel::param_count)
      .def("init_weights", &ScoreModel::init_weights, py::arg("scale"), py::arg("seed"))
      .def("forward", &ScoreModel::forward, py::arg("x"));

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("weight_init_scale", &TrainConfig::weight_init_scale);

  py::enum_<LossKind>(m, "LossKind")
      .value("lce", LossKind::lce)
      .value("cross_entropy_all", LossKind::cross_entropy_all)
      .value("cross_entropy_classes", LossKind::cross_entropy_classes)
      .value("expert_correctness", LossKind::expert_correctness);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("model", &TrainResult::model)
      .def_readonly("epoch_loss", &TrainResult::epoch_loss)
      .def_readonly("initial_loss", &TrainResult::initial_loss);

  py::class_<StagedResult>(m, "StagedResult")
      .def_readonly("classifier", &StagedResult::classifier)
      .def_readonly("expert_head", &StagedResult::expert_head)
      .def_readonly("system", &StagedResult::system);

  m.def("train_gd", &train_gd, py::arg("model"), py::arg("data"), py::arg("cfg"),
        py::arg("kind"));
  m.def("mean_loss", &mean_loss, py::arg("model"), py::arg("data"), py::arg("kind"));
  m.def("train_joint", &train_joint, py::arg("model"), py::arg("data_l"), py::arg("cfg"));
  m.def("train_staged", &train_staged, py::arg("classifier"), py::arg("expert_head"),
        py::arg("data_all"), py::arg("data_l"), py::arg("cfg"));
  m.def("train_joint_semisupervised", &train_joint_semisupervised, py::arg("model"),
        py::arg("data_u"), py::arg("data_l"), py::arg("cfg"));
  m.def("decode_model", &decode_model, py::arg("model"));

  // ---- active ----------------------------------------------------------------
  py::class_<RoundRow>(m, "RoundRow")
      .def_readonly("round", &RoundRow::round)
      .def_readonly("labels_used", &RoundRow::labels_used)
      .def_readonly("version_space_size", &RoundRow::version_space_size)
      .def_readonly("dis_mass_estimate", &RoundRow::dis_mass_estimate)
      .def_readonly("exact_risk", &RoundRow::exact_risk);

  py::class_<ActiveOptions>(m, "ActiveOptions")
      .def(py::init<>())
      .def_readwrite("pool_size", &ActiveOptions::pool_size)
      .def_readwrite("budget_cap", &ActiveOptions::budget_cap)
      .def_readwrite("dis_mc", &ActiveOptions::dis_mc)
      .def_readwrite("risk_fn", &ActiveOptions::risk_fn);

  py::class_<PairRunResult>(m, "PairRunResult")
      .def_readonly("h_index", &PairRunResult::h_index)
      .def_readonly("r_index", &PairRunResult::r_index)
      .def_readonly("trace", &PairRunResult::trace)
      .def_readonly("budget_exhausted", &PairRunResult::budget_exhausted)
      .def_readonly("labels_used", &PairRunResult::labels_used);

  py::class_<DodSelection>(m, "DodSelection")
      .def_readonly("d_index", &DodSelection::d_index)
      .def_readonly("h_index", &DodSelection::h_index)
      .def_readonly("r_index", &DodSelection::r_index)
      .def_readonly("consistent", &DodSelection::consistent);

  py::class_<DodResult>(m, "DodResult")
      .def_readonly("selection", &DodResult::selection)
      .def_readonly("per_round", &DodResult::per_round)
      .def_readonly("trace", &DodResult::trace)
      .def_readonly("budget_exhausted", &DodResult::budget_exhausted)
      .def_readonly("version_space_collapsed", &DodResult::version_space_collapsed)
      .def_readonly("labels_used", &DodResult::labels_used);

  m.def("rejector_disagreement_run", &rejector_disagreement_run, py::arg("classH"),
        py::arg("classR"), py::arg("world"), py::arg("queries_per_round"), py::arg("rounds"),
        py::arg("seed"), py::arg("opts") = ActiveOptions{});
  m.def("dod_run", &dod_run, py::arg("classD"), py::arg("classH"), py::arg("classR"),
        py::arg("world"), py::arg("rounds"), py::arg("queries_per_round"), py::arg("n_u"),
        py::arg("seed"), py::arg("opts") = ActiveOptions{});
  m.def("estimate_theta2", &estimate_theta2, py::arg("classD"), py::arg("f_star"),
        py::arg("world"), py::arg("t_grid"), py::arg("n_mc"), py::arg("seed"));

  // ---- harness ---------------------------------------------------------------
  m.def("run_experiment_text", &run_experiment_text, py::arg("config_text"));

  // Error taxonomy: every library precondition violation surfaces as one
  // Python exception type.
  py::register_exception<Error>(m, "DeferLabError");
}
