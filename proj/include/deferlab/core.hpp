#pragma once

// Deferral systems and their losses: a classifier h: X -> [1..K] paired with
// a rejector r: X -> {0,1}; r(x)=1 routes x to a human expert whose
// prediction m is scored instead of h(x).

#include <functional>
#include <optional>
#include <vector>

#include "deferlab/errors.hpp"

namespace deferlab {

using Vec = std::vector<double>;

struct Sample {
  Vec x;
  int y = 0;                  // label in [1..K]
  std::optional<int> m;       // expert prediction; absent for expert-unlabeled data
};

struct DeferralSystem {
  std::function<int(const Vec&)> h;  // label in [1..K]
  std::function<int(const Vec&)> r;  // 0 = predict with h, 1 = defer
};

// Extra penalties on top of the 0-1 terms: c_ai(x, y, prediction) when the
// classifier answers, c_exp(x, y, m) when the expert answers.
struct CostSpec {
  std::function<double(const Vec&, int, int)> c_ai;
  std::function<double(const Vec&, int, int)> c_exp;

  static CostSpec zero();
};

// Finite-support joint distribution over (x, y, m); permits exact risk
// computation and exhaustive optimization.
struct AtomicWorld {
  int num_classes = 2;                                        // K
  std::vector<Vec> points;                                    // support, duplicate-free
  std::vector<double> masses;                                 // p(x), sums to 1
  std::vector<std::vector<double>> label_dist;                // [point][y-1] = p(y|x)
  std::vector<std::vector<std::vector<double>>> expert_dist;  // [point][y-1][m-1] = p(m|x,y)

  std::size_t support_size() const { return points.size(); }

  // Index of an exact point match; throws OutOfRangeError when x is not a
  // support point (systems evaluated on an atomic world are total on its
  // support by construction).
  std::size_t point_index(const Vec& x) const;

  // Checks mass/label/expert sums (1e-12 tolerance), nonnegativity and
  // duplicate-freeness; throws InvalidDistributionError on violation.
  void validate() const;
};

// Empirical mean of the 0-1 deferral loss:
//   (1/n) sum [ I{h(x)!=y} I{r(x)=0} + I{m!=y} I{r(x)=1} ].
// Every deferred sample must carry m.
double deferral_loss_01(const DeferralSystem& system, const std::vector<Sample>& data);

// General-cost version:
//   (1/n) sum [ (I{h!=y}+c_ai) I{r=0} + (I{m!=y}+c_exp) I{r=1} ].
double deferral_loss_general(const DeferralSystem& system, const std::vector<Sample>& data,
                             const CostSpec& costs);

// Exact expectation of the 0-1 deferral loss over a finite-support world;
// sums run in support order so the result is bit-reproducible.
double exact_deferral_risk(const DeferralSystem& system, const AtomicWorld& world);

// Expected misclassification rate of a bare classifier on an atomic world.
double exact_classification_risk(const std::function<int(const Vec&)>& h,
                                 const AtomicWorld& world);

// A (K+1)-way prediction decodes to (classifier label, defer flag): action
// i<=K predicts class i, action K+1 defers (the label slot gets the dummy
// value 1 and must never be read when the flag is set).
std::pair<int, int> decode_pair(int prediction, int num_classes);

}  // namespace deferlab
