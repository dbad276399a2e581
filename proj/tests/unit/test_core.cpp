#include "doctest.h"

#include <cmath>

#include "deferlab/core.hpp"
#include "deferlab/errors.hpp"

using namespace deferlab;

namespace {

DeferralSystem constant_system(int label, int defer) {
  return DeferralSystem{[label](const Vec&) { return label; },
                        [defer](const Vec&) { return defer; }};
}

// Two points, two classes: x=0 is always class 1 and the expert copies the
// label; x=1 is always class 2 and the expert answers 1 (always wrong).
AtomicWorld two_point_world() {
  AtomicWorld w;
  w.num_classes = 2;
  w.points = {Vec{0.0}, Vec{1.0}};
  w.masses = {0.5, 0.5};
  w.label_dist = {{1.0, 0.0}, {0.0, 1.0}};
  w.expert_dist = {
      {{1.0, 0.0}, {0.0, 1.0}},
      {{1.0, 0.0}, {1.0, 0.0}},
  };
  w.validate();
  return w;
}

}  // namespace

TEST_CASE("core: decode_pair maps class actions and the defer action") {
  CHECK(decode_pair(1, 4) == std::pair<int, int>{1, 0});
  CHECK(decode_pair(4, 4) == std::pair<int, int>{4, 0});
  CHECK(decode_pair(5, 4) == std::pair<int, int>{1, 1});  // dummy label, defer set
  CHECK(decode_pair(3, 2) == std::pair<int, int>{1, 1});
}

TEST_CASE("core: decode_pair rejects actions outside [1, K+1]") {
  CHECK_THROWS_AS(decode_pair(0, 4), OutOfRangeError);
  CHECK_THROWS_AS(decode_pair(6, 4), OutOfRangeError);
  CHECK_THROWS_AS(decode_pair(-1, 2), OutOfRangeError);
}

TEST_CASE("core: 0-1 deferral loss scores the classifier on kept points") {
  const std::vector<Sample> data = {{Vec{0.0}, 1, 2}, {Vec{1.0}, 2, 2}};
  // Predict 2 everywhere, never defer: wrong on the first sample only.
  CHECK(deferral_loss_01(constant_system(2, 0), data) == doctest::Approx(0.5));
  // Always defer: the expert is wrong on the first sample only.
  CHECK(deferral_loss_01(constant_system(1, 1), data) == doctest::Approx(0.5));
}

TEST_CASE("core: 0-1 deferral loss needs data and expert labels on deferred points") {
  CHECK_THROWS_AS(deferral_loss_01(constant_system(1, 0), {}), EmptyDataError);
  const std::vector<Sample> no_expert = {{Vec{0.0}, 1, std::nullopt}};
  // Keeping the point is fine without m; deferring it is not.
  CHECK(deferral_loss_01(constant_system(1, 0), no_expert) == doctest::Approx(0.0));
  CHECK_THROWS_AS(deferral_loss_01(constant_system(1, 1), no_expert),
                  MissingExpertLabelError);
}

TEST_CASE("core: general-cost loss adds the extra penalties") {
  const std::vector<Sample> data = {{Vec{0.0}, 1, 1}, {Vec{1.0}, 2, 1}};
  CostSpec costs;
  costs.c_ai = [](const Vec&, int, int) { return 0.25; };
  costs.c_exp = [](const Vec&, int, int) { return 0.5; };
  // Never defer, predict 1: one error of the two -> (1 + 0.25 + 0.25)/2.
  CHECK(deferral_loss_general(constant_system(1, 0), data, costs) == doctest::Approx(0.75));
  // Always defer: expert wrong on the second -> (0.5 + 1 + 0.5)/2.
  CHECK(deferral_loss_general(constant_system(1, 1), data, costs) == doctest::Approx(1.0));
  // Zero extra costs reduce to the 0-1 loss.
  CHECK(deferral_loss_general(constant_system(1, 0), data, CostSpec::zero()) ==
        doctest::Approx(deferral_loss_01(constant_system(1, 0), data)));
}

TEST_CASE("core: exact risk on a two-point world") {
  const AtomicWorld w = two_point_world();
  // Predict 2 everywhere, never defer: wrong only at x=0 -> 0.5.
  CHECK(exact_deferral_risk(constant_system(2, 0), w) == doctest::Approx(0.5));
  // Always defer: expert wrong only at x=1 -> 0.5.
  CHECK(exact_deferral_risk(constant_system(1, 1), w) == doctest::Approx(0.5));
  // Defer exactly at x=0 and predict 2 elsewhere: zero risk.
  const DeferralSystem best{[](const Vec&) { return 2; },
                            [](const Vec& x) { return x[0] == 0.0 ? 1 : 0; }};
  CHECK(exact_deferral_risk(best, w) == 0.0);
}

TEST_CASE("core: exact classification risk ignores the expert channel") {
  const AtomicWorld w = two_point_world();
  CHECK(exact_classification_risk([](const Vec&) { return 1; }, w) == doctest::Approx(0.5));
  CHECK(exact_classification_risk([](const Vec& x) { return x[0] == 0.0 ? 1 : 2; }, w) ==
        doctest::Approx(0.0));
}

TEST_CASE("core: atomic world validation catches malformed distributions") {
  AtomicWorld w = two_point_world();
  w.masses = {0.4, 0.5};
  CHECK_THROWS_AS(w.validate(), InvalidDistributionError);

  w = two_point_world();
  w.label_dist[0] = {0.9, 0.2};
  CHECK_THROWS_AS(w.validate(), InvalidDistributionError);

  w = two_point_world();
  w.points[1] = w.points[0];
  CHECK_THROWS_AS(w.validate(), InvalidDistributionError);
}

TEST_CASE("core: point_index finds support points and rejects others") {
  const AtomicWorld w = two_point_world();
  CHECK(w.point_index(Vec{1.0}) == 1);
  CHECK_THROWS_AS(w.point_index(Vec{0.5}), OutOfRangeError);
}
