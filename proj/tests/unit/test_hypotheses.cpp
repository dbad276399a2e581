#include "doctest.h"

#include <cstdint>

#include "deferlab/core.hpp"
#include "deferlab/errors.hpp"
#include "deferlab/hypotheses.hpp"
#include "deferlab/rng.hpp"
#include "deferlab/worlds.hpp"

using namespace deferlab;

TEST_CASE("hypotheses: threshold members fire on the configured side") {
  const FiniteClass up = make_threshold_class({0.5, 0.2}, true, 2, 1);
  CHECK(up.size() == 2);
  CHECK(up.eval(0, Vec{0.7}) == 2);
  CHECK(up.eval(0, Vec{0.5}) == 1);  // boundary is negative
  CHECK(up.eval(1, Vec{0.3}) == 2);

  const FiniteClass down = make_threshold_class({0.5}, false, 1, 0);
  CHECK(down.eval(0, Vec{0.5}) == 1);  // fires at and below the cut
  CHECK(down.eval(0, Vec{0.7}) == 0);
}

TEST_CASE("hypotheses: support-bounded members enumerate small subsets in order") {
  const std::vector<Vec> support = {Vec{1.0}, Vec{2.0}, Vec{3.0}};
  const FiniteClass cls = make_support_bounded_class(support, 1, 2, 1);
  // Subsets of size <= 1 over 3 points: {}, {1}, {2}, {3}.
  CHECK(cls.size() == 4);
  // Member 0 is the all-negative function.
  for (const Vec& x : support) CHECK(cls.eval(0, x) == 1);
  // Ascending bitmask order: member 1 fires on the first support point only.
  CHECK(cls.eval(1, Vec{1.0}) == 2);
  CHECK(cls.eval(1, Vec{2.0}) == 1);
  CHECK(cls.eval(2, Vec{2.0}) == 2);
  CHECK(cls.eval(3, Vec{3.0}) == 2);
  // Off-support points get the negative output.
  CHECK(cls.eval(3, Vec{9.0}) == 1);

  const FiniteClass pairs = make_support_bounded_class(support, 2, 2, 1);
  CHECK(pairs.size() == 7);  // {} + 3 singletons + 3 pairs
}

TEST_CASE("hypotheses: lookup classes answer from their tables only") {
  const FiniteClass cls =
      make_lookup_class({Vec{0.0}, Vec{1.0}}, {{1, 2}, {2, 2}});
  CHECK(cls.eval(0, Vec{0.0}) == 1);
  CHECK(cls.eval(0, Vec{1.0}) == 2);
  CHECK(cls.eval(1, Vec{0.0}) == 2);
  CHECK_THROWS_AS(cls.eval(0, Vec{0.5}), OutOfRangeError);
  CHECK_THROWS_AS(cls.eval(2, Vec{0.0}), OutOfRangeError);
}

TEST_CASE("hypotheses: lookup enumeration covers the full product") {
  const CalCounterexample cal = make_cal_counterexample_world();
  const auto [classifiers, rejectors] = enumerate_lookup_pairs(cal.world, 2);
  CHECK(classifiers.size() == 4);  // 2^2 label tables
  CHECK(rejectors.size() == 4);    // 2^2 defer tables
  // Classifier member 0 answers 1 everywhere; the point-0 digit moves first.
  CHECK(classifiers.eval(0, Vec{0.0}) == 1);
  CHECK(classifiers.eval(0, Vec{1.0}) == 1);
  CHECK(classifiers.eval(1, Vec{0.0}) == 2);
  CHECK(classifiers.eval(1, Vec{1.0}) == 1);
  // Rejector member bit p defers point p.
  CHECK(rejectors.eval(0, Vec{0.0}) == 0);
  CHECK(rejectors.eval(1, Vec{0.0}) == 1);
  CHECK(rejectors.eval(2, Vec{1.0}) == 1);

  AtomicWorld big = random_atomic_world(7, 2, 1);
  CHECK_THROWS_AS(enumerate_lookup_pairs(big, 2), SizeLimitError);
}

TEST_CASE("hypotheses: empirical ERM picks the lowest-index minimizer") {
  const FiniteClass cls = make_threshold_class({0.1, 0.5, 0.9}, true, 2, 1);
  const std::vector<Sample> data = {{Vec{0.3}, 1, std::nullopt}, {Vec{0.7}, 2, std::nullopt}};
  // Cut 0.5 classifies both correctly.
  CHECK(erm_classifier(cls, data) == 1);
  // Under ties (single unlabeled-ish point both cuts fit), the lowest index wins.
  const std::vector<Sample> one = {{Vec{0.95}, 2, std::nullopt}};
  CHECK(erm_classifier(cls, one) == 0);
  CHECK_THROWS_AS(erm_classifier(cls, {}), EmptyDataError);
}

TEST_CASE("hypotheses: rejector ERM spends expert labels only on deferrals") {
  const FiniteClass classR = make_threshold_class({0.2, 0.8}, false, 1, 0);
  const auto h = [](const Vec&) { return 2; };
  // Expert right below 0.3, wrong above; h right above 0.3 only.
  const std::vector<Sample> data = {
      {Vec{0.1}, 1, 1}, {Vec{0.25}, 1, 1}, {Vec{0.6}, 2, 1}, {Vec{0.9}, 2, 1}};
  // Defer at x <= 0.2 fixes the first point; defer at x <= 0.8 also hurts at 0.6.
  CHECK(erm_rejector(classR, h, data) == 0);
  // Missing m only matters for points a candidate rejector defers.
  const std::vector<Sample> kept_only = {{Vec{0.9}, 2, std::nullopt}};
  CHECK_NOTHROW(erm_rejector(make_threshold_class({0.2}, false, 1, 0), h, kept_only));
  const std::vector<Sample> deferred = {{Vec{0.1}, 1, std::nullopt}};
  CHECK_THROWS_AS(erm_rejector(make_threshold_class({0.2}, false, 1, 0), h, deferred),
                  MissingExpertLabelError);
}

TEST_CASE("hypotheses: joint ERM beats staged on the adversarial world") {
  const std::vector<Vec> support = theorem1_support(2);
  const FiniteClass classH = make_support_bounded_class(support, 2, 2, 1);
  const FiniteClass classR = make_support_bounded_class(support, 1, 1, 0);
  const AtomicWorld world = make_theorem1_world(2, 0.1, classH);

  const ErmPairResult staged = staged_erm_exact(classH, classR, world);
  const ErmPairResult joint = joint_erm_exact(classH, classR, world);
  CHECK(staged.risk == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(joint.risk == 0.0);
  // Staged keeps the never-defer rejector (member 0). The lowest-index joint
  // optimum classifies the first and last points and hands the middle one to
  // the expert, who is right there.
  CHECK(staged.r_index == 0);
  CHECK(classR.eval(joint.r_index, support[1]) == 1);
  CHECK(classH.eval(joint.h_index, support[0]) == 2);
  CHECK(classH.eval(joint.h_index, support[2]) == 2);

  // The joint optimum evaluated empirically on exhaustive support data agrees.
  std::vector<Sample> data;
  for (std::size_t p = 0; p < world.support_size(); ++p) {
    int y = 1;
    for (int k = 0; k < world.num_classes; ++k) {
      if (world.label_dist[p][k] == 1.0) y = k + 1;
    }
    int m = 1;
    for (int k = 0; k < world.num_classes; ++k) {
      if (world.expert_dist[p][y - 1][k] == 1.0) m = k + 1;
    }
    data.push_back({world.points[p], y, m});
  }
  const auto [hj, rj] = erm_joint(classH, classR, data);
  CHECK(deferral_loss_01(make_system(classH, hj, classR, rj), data) == doctest::Approx(0.0));
}

TEST_CASE("hypotheses: staged-joint gap respects the capacity-ratio bound") {
  for (int t = 0; t < 40; ++t) {
    const AtomicWorld world = random_atomic_world(6, 2, hash_seed(99, t));
    const int d_h = 1 + (t % 3);
    const int d_r = 1 + (t % d_h);
    const FiniteClass classH = make_support_bounded_class(world.points, d_h, 2, 1);
    const FiniteClass classR = make_support_bounded_class(world.points, d_r, 1, 0);
    const ErmPairResult staged = staged_erm_exact(classH, classR, world);
    const ErmPairResult joint = joint_erm_exact(classH, classR, world);
    CHECK(staged.risk >= joint.risk);  // joint scans a superset
    CHECK(staged.risk - joint.risk <=
          static_cast<double>(d_r) / static_cast<double>(d_h) + 1e-9);
  }
}

TEST_CASE("hypotheses: pair cap and support cap guard the exhaustive scans") {
  const std::vector<Vec> support = theorem1_support(2);
  const FiniteClass classH = make_support_bounded_class(support, 2, 2, 1);
  const FiniteClass classR = make_support_bounded_class(support, 1, 1, 0);
  const AtomicWorld world = make_theorem1_world(2, 0.1, classH);
  CHECK_THROWS_AS(joint_erm_exact(classH, classR, world, 3), SizeLimitError);

  std::vector<Vec> big;
  for (int i = 0; i < 64; ++i) big.push_back(Vec{static_cast<double>(i)});
  CHECK_THROWS_AS(make_support_bounded_class(big, 1, 2, 1), SizeLimitError);
}
