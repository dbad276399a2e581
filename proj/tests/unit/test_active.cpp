#include "doctest.h"

#include <cstdint>
#include <utility>
#include <vector>

#include "deferlab/active.hpp"
#include "deferlab/errors.hpp"
#include "deferlab/hypotheses.hpp"
#include "deferlab/rng.hpp"
#include "deferlab/worlds.hpp"

using namespace deferlab;

namespace {

std::vector<double> random_cuts(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> cuts(count);
  for (double& c : cuts) c = rng.uniform01();
  return cuts;
}

}  // namespace

TEST_CASE("active: initial pair space keeps pool-consistent pairs only") {
  const CalCounterexample cal = make_cal_counterexample_world();
  const WorldView view(cal.world);
  const std::vector<Sample> pool = sample_unlabeled(view, 200, 99);

  const PairVersionSpace vs = init_pair_version_space(cal.classH, cal.classR, pool);
  // (constant-1 classifier, never-defer rejector) keeps x=1 but predicts 1
  // there; every other pair survives.
  const std::vector<std::pair<std::uint32_t, std::uint32_t>> expected = {
      {0, 0}, {0, 1}, {1, 0}};
  CHECK(vs.alive == expected);
  CHECK(vs.alive_rejectors == std::vector<std::uint32_t>{0, 1});

  // The surviving rejectors split on x=1 and agree on x=0.
  CHECK(dis_rejector(vs, {1.0}));
  CHECK_FALSE(dis_rejector(vs, {0.0}));

  CHECK_THROWS_AS(init_pair_version_space(cal.classH, cal.classR, {}), EmptyPoolError);
}

TEST_CASE("active: pair-based sampling stalls on the counterexample world") {
  const CalCounterexample cal = make_cal_counterexample_world();
  const WorldView view(cal.world);
  ActiveOptions opts;
  opts.dis_mc = 4000;
  opts.risk_fn = [&](const DeferralSystem& sys) { return exact_deferral_risk(sys, cal.world); };

  const PairRunResult run =
      rejector_disagreement_run(cal.classH, cal.classR, view, 5, 6, 1234, opts);

  CHECK(run.trace.size() == 6);
  for (std::size_t i = 0; i < run.trace.size(); ++i) {
    const RoundRow& row = run.trace[i];
    CHECK(row.round == static_cast<int>(i) + 1);
    CHECK(row.version_space_size == 3);  // labels never eliminate anything
    CHECK(row.labels_used == static_cast<std::int64_t>(5 * (i + 1)));
    CHECK(row.dis_mass_estimate > 0.4);
    CHECK(row.dis_mass_estimate < 0.6);
    CHECK(row.exact_risk == 0.0);  // every surviving pair is already optimal
  }
  CHECK(run.labels_used == 30);
  CHECK_FALSE(run.budget_exhausted);
  CHECK(run.h_index == 0);
  CHECK(run.r_index == 0);
}

TEST_CASE("active: pair filtering can empty the space and reports it") {
  // One point distribution over {0} and {1}, label always 1, expert always
  // wrong; the two rejectors defer on complementary points, so one round that
  // queries both points eliminates both pairs.
  AtomicWorld world;
  world.num_classes = 2;
  world.points = {{0.0}, {1.0}};
  world.masses = {0.5, 0.5};
  world.label_dist = {{1.0, 0.0}, {1.0, 0.0}};
  world.expert_dist = {{{0.0, 1.0}, {1.0, 0.0}}, {{0.0, 1.0}, {1.0, 0.0}}};
  world.validate();

  const FiniteClass classH = make_lookup_class(world.points, {{1, 1}});
  const FiniteClass classR = make_lookup_class(world.points, {{1, 0}, {0, 1}});
  CHECK_THROWS_AS(rejector_disagreement_run(classH, classR, WorldView(world), 10, 1, 5),
                  EmptyVersionSpaceError);
}

TEST_CASE("active: dod converges with one query round on a realizable world") {
  const CalCounterexample cal = make_cal_counterexample_world();
  const WorldView view(cal.world);
  // Defer predictors: member 0 never defers, member 1 defers on x=1. The
  // expert is always right, so the target predictor is member 0.
  const FiniteClass classD = make_lookup_class(cal.world.points, {{0, 0}, {0, 1}});
  ActiveOptions opts;
  opts.dis_mc = 2000;
  opts.risk_fn = [&](const DeferralSystem& sys) { return exact_deferral_risk(sys, cal.world); };

  const DodResult run = dod_run(classD, cal.classH, cal.classR, view, 4, 5, 100, 321, opts);

  // Round 1 queries x=1 (the only stage-1 disagreement point), sees a correct
  // expert, and eliminates the deferring predictor; the next round starts
  // from a singleton space and stops without spending labels.
  CHECK(run.trace.size() == 1);
  CHECK(run.trace[0].version_space_size == 1);
  CHECK(run.labels_used == 5);
  CHECK(run.budget_exhausted);  // singleton space counts as convergence
  CHECK_FALSE(run.version_space_collapsed);

  CHECK(run.selection.consistent);
  CHECK(run.selection.d_index == 0);
  CHECK(run.selection.h_index == 0);  // identity classifier
  // The surviving predictor marks no point as an expert error, so deferring
  // anywhere stays consistent; the scan takes the first such rejector.
  CHECK(run.selection.r_index == 0);
  CHECK(run.trace[0].exact_risk == 0.0);
  CHECK(run.per_round.size() == run.trace.size());
}

TEST_CASE("active: dod version space only shrinks") {
  const ContinuousWorld fig4 = make_fig4_world();
  const WorldView view(fig4);
  const FiniteClass classH = make_threshold_class(random_cuts(30, 41), true, 2, 1);
  const FiniteClass classR = make_threshold_class(random_cuts(30, 43), false, 1, 0);
  ActiveOptions opts;
  opts.dis_mc = 500;

  for (std::uint64_t t = 0; t < 5; ++t) {
    const FiniteClass classD =
        make_threshold_class(random_cuts(30, hash_seed(47, t)), true, 1, 0);
    const DodResult run = dod_run(classD, classH, classR, view, 5, 5, 200, hash_seed(77, t), opts);
    REQUIRE(!run.trace.empty());
    for (std::size_t i = 1; i < run.trace.size(); ++i) {
      CHECK(run.trace[i].version_space_size <= run.trace[i - 1].version_space_size);
    }
    CHECK(run.per_round.size() == run.trace.size());
    CHECK(run.labels_used == run.trace.back().labels_used);
  }
}

TEST_CASE("active: dod argument validation") {
  const CalCounterexample cal = make_cal_counterexample_world();
  const WorldView view(cal.world);
  const FiniteClass classD = make_lookup_class(cal.world.points, {{0, 0}});
  CHECK_THROWS_AS(dod_run(classD, cal.classH, cal.classR, view, 3, 0, 10, 1), OutOfRangeError);
  CHECK_THROWS_AS(dod_run(classD, cal.classH, cal.classR, view, 3, 5, 0, 1), EmptyDataError);
}

TEST_CASE("active: theta2 matches the hand-computed two-cut value") {
  // Member 0 (the target) fires above 0.2, member 1 above 0.8; they disagree
  // on (0.2, 0.8], mass 0.6 under the uniform feature draw. Radius 0.5
  // excludes member 1 (empty disagreement region), radius 1 includes it.
  const ContinuousWorld fig4 = make_fig4_world();
  const WorldView view(fig4);
  const FiniteClass classD = make_threshold_class({0.2, 0.8}, true, 1, 0);

  const double theta = estimate_theta2(classD, 0, view, {0.5, 1.0}, 20000, 7);
  CHECK(theta == doctest::Approx(0.6).epsilon(0.05));

  CHECK_THROWS_AS(estimate_theta2(classD, 5, view, {1.0}, 100, 7), OutOfRangeError);
  CHECK_THROWS_AS(estimate_theta2(classD, 0, view, {}, 100, 7), EmptyDataError);
  CHECK_THROWS_AS(estimate_theta2(classD, 0, view, {1.0}, 0, 7), EmptyDataError);
  CHECK_THROWS_AS(estimate_theta2(classD, 0, view, {0.0}, 100, 7), OutOfRangeError);
}

TEST_CASE("active: dis2 reports the predictor disagreement region") {
  const FiniteClass classD = make_threshold_class({0.2, 0.8}, true, 1, 0);
  PredictorVersionSpace vs;
  vs.classD = &classD;
  vs.alive = {0, 1};
  CHECK(dis2(vs, {0.5}));
  CHECK_FALSE(dis2(vs, {0.1}));
  CHECK_FALSE(dis2(vs, {0.9}));
  vs.alive = {0};
  CHECK_FALSE(dis2(vs, {0.5}));
}
