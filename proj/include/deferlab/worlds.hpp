#pragma once

// Synthetic world generators and deterministic sampling. Worlds come in two
// flavors: atomic (finite support, explicit distributions — see core.hpp) and
// continuous (feature sampler + label rule + expert rule). A WorldView wraps
// either so samplers and experiment drivers can stay generic.

#include <cstdint>
#include <functional>
#include <vector>

#include "deferlab/core.hpp"
#include "deferlab/hypotheses.hpp"
#include "deferlab/rng.hpp"

namespace deferlab {

// Expert behavior templates for continuous worlds.
struct ExpertModel {
  enum class Kind { region_perfect, always_constant, noisy_oracle };
  Kind kind = Kind::noisy_oracle;
  // region_perfect: matches the label inside the region, uniform over all
  // labels outside it.
  std::function<bool(const Vec&)> region;
  // always_constant
  int constant_label = 1;
  // noisy_oracle: matches the label with probability correct_prob, otherwise
  // uniform over the remaining labels.
  double correct_prob = 1.0;
};

struct ContinuousWorld {
  int num_classes = 2;
  int feature_dim = 1;
  std::function<Vec(Rng&)> feature_sampler;
  std::function<int(const Vec&, Rng&)> label_rule;           // -> y in [1..K]
  std::function<int(const Vec&, int, Rng&)> expert_rule;     // (x, y) -> m in [1..K]
};

std::function<int(const Vec&, int, Rng&)> make_expert_rule(const ExpertModel& expert,
                                                           int num_classes);

class WorldView {
 public:
  explicit WorldView(const ContinuousWorld& w) : cont_(&w) {}
  explicit WorldView(const AtomicWorld& w) : atom_(&w) {}

  int num_classes() const;
  bool is_atomic() const { return atom_ != nullptr; }
  const AtomicWorld* atomic() const { return atom_; }

  // Sample number `index` of stream `seed`. All randomness for one sample is
  // drawn from a substream keyed on (seed, index), and the expert draw comes
  // last, so labeled and unlabeled streams with the same seed share their
  // (x, y) values exactly.
  Sample draw(std::uint64_t seed, std::uint64_t index, bool with_expert) const;

 private:
  const ContinuousWorld* cont_ = nullptr;
  const AtomicWorld* atom_ = nullptr;
};

// n samples with expert predictions attached / stripped. n must be positive.
std::vector<Sample> sample_labeled(const WorldView& world, std::size_t n, std::uint64_t seed);
std::vector<Sample> sample_unlabeled(const WorldView& world, std::size_t n, std::uint64_t seed);

// One-dimensional benchmark: x ~ U[0,1]; above 0.3 the label is
// deterministically class 2, below it is a fair coin over {1,2}; the expert
// is exactly right on the noisy region x <= 0.3 and exactly wrong above it.
// Deferring below 0.3 and predicting class 2 above gives deferral risk 0,
// while the best classifier alone is stuck at risk 0.15.
ContinuousWorld make_fig4_world();

// Atomic discretization of the same world on `cells` midpoint cells, for
// exact risk evaluation of learned systems.
AtomicWorld fig4_grid_world(std::size_t cells);

// Adversarial atomic world on d+1 scalar points x_i = i with masses
// (1+eps)/(d+1), 1/(d+1), ..., (1-eps)/(d+1). The label assignment is the
// first one in lexicographic order over {1,2}^(d+1) that no member of classH
// fits everywhere (labels deterministic), and the expert is right everywhere
// except the last point. Staged selection then pays (1-eps)/(d+1) no matter
// which rejector it picks, while a joint choice that defers the first point
// reaches risk 0. Throws ConstructionFailedError when classH fits every
// assignment.
AtomicWorld make_theorem1_world(int d, double eps, const FiniteClass& classH);

// Canonical support {1, 2, ..., d+1} used by make_theorem1_world.
std::vector<Vec> theorem1_support(int d);

// Two-point world on which rejector-based disagreement sampling never
// converges: X uniform on {0,1}, Y = X (encoded 1/2), expert always correct.
// All of (h1,r1), (h1,r2), (h2,r1) have deferral risk 0, yet the surviving
// rejectors disagree on x = 1 forever, so the disagreement region keeps mass
// 0.5 and labels are spent without shrinking it.
struct CalCounterexample {
  AtomicWorld world;
  FiniteClass classH;  // h1 = identity table (1,2); h2 = constant (1,1)
  FiniteClass classR;  // r1 = defer on x=1 (0,1); r2 = never defer (0,0)
};
CalCounterexample make_cal_counterexample_world();

// Random atomic world: masses from a normalized uniform draw, label and
// expert rows from Dirichlet(1) draws. Used by verification sweeps.
AtomicWorld random_atomic_world(std::size_t support_size, int num_classes, std::uint64_t seed);

}  // namespace deferlab
