#include "deferlab/worlds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "deferlab/errors.hpp"

namespace deferlab {

std::function<int(const Vec&, int, Rng&)> make_expert_rule(const ExpertModel& expert,
                                                           int num_classes) {
  if (num_classes < 2) throw OutOfRangeError("expert rule needs at least two classes");
  switch (expert.kind) {
    case ExpertModel::Kind::region_perfect: {
      if (!expert.region) throw Error("region_perfect expert needs a region predicate");
      auto region = expert.region;
      return [region, num_classes](const Vec& x, int y, Rng& rng) {
        if (region(x)) return y;
        return static_cast<int>(rng.uniform_int(1, num_classes));
      };
    }
    case ExpertModel::Kind::always_constant: {
      const int label = expert.constant_label;
      if (label < 1 || label > num_classes) {
        throw OutOfRangeError("constant expert label out of range");
      }
      return [label](const Vec&, int, Rng&) { return label; };
    }
    case ExpertModel::Kind::noisy_oracle: {
      const double q = expert.correct_prob;
      if (q < 0.0 || q > 1.0) throw OutOfRangeError("expert correct_prob must lie in [0,1]");
      return [q, num_classes](const Vec&, int y, Rng& rng) {
        if (rng.bernoulli(q)) return y;
        // Uniform over the K-1 other labels.
        int pick = static_cast<int>(rng.uniform_int(1, num_classes - 1));
        return (pick < y) ? pick : pick + 1;
      };
    }
  }
  throw Error("unreachable expert kind");
}

int WorldView::num_classes() const {
  return atom_ ? atom_->num_classes : cont_->num_classes;
}

Sample WorldView::draw(std::uint64_t seed, std::uint64_t index, bool with_expert) const {
  Rng rng(hash_seed(seed, index));
  Sample s;
  if (atom_) {
    const std::size_t p = rng.categorical(atom_->masses);
    s.x = atom_->points[p];
    s.y = 1 + static_cast<int>(rng.categorical(atom_->label_dist[p]));
    if (with_expert) {
      s.m = 1 + static_cast<int>(rng.categorical(atom_->expert_dist[p][static_cast<std::size_t>(s.y - 1)]));
    }
  } else {
    s.x = cont_->feature_sampler(rng);
    s.y = cont_->label_rule(s.x, rng);
    if (with_expert) {
      s.m = cont_->expert_rule(s.x, s.y, rng);
    }
  }
  return s;
}

std::vector<Sample> sample_labeled(const WorldView& world, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw EmptyDataError("sample_labeled needs n >= 1");
  std::vector<Sample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(world.draw(seed, i, true));
  return out;
}

std::vector<Sample> sample_unlabeled(const WorldView& world, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw EmptyDataError("sample_unlabeled needs n >= 1");
  std::vector<Sample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(world.draw(seed, i, false));
  return out;
}

ContinuousWorld make_fig4_world() {
  ContinuousWorld w;
  w.num_classes = 2;
  w.feature_dim = 1;
  w.feature_sampler = [](Rng& rng) { return Vec{rng.uniform01()}; };
  w.label_rule = [](const Vec& x, Rng& rng) {
    if (x[0] > 0.3) return 2;
    return rng.bernoulli(0.5) ? 2 : 1;
  };
  ExpertModel expert;
  expert.kind = ExpertModel::Kind::region_perfect;
  expert.region = [](const Vec& x) { return x[0] <= 0.3; };
  // With K = 2 the off-region uniform draw would be right half the time; this
  // world wants the expert exactly wrong above 0.3, so flip the label there.
  w.expert_rule = [](const Vec& x, int y, Rng&) {
    if (x[0] <= 0.3) return y;
    return (y == 1) ? 2 : 1;
  };
  return w;
}

AtomicWorld fig4_grid_world(std::size_t cells) {
  if (cells == 0) throw OutOfRangeError("fig4_grid_world needs at least one cell");
  AtomicWorld w;
  w.num_classes = 2;
  w.points.reserve(cells);
  w.masses.assign(cells, 1.0 / static_cast<double>(cells));
  w.label_dist.reserve(cells);
  w.expert_dist.reserve(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    const double x = (static_cast<double>(c) + 0.5) / static_cast<double>(cells);
    w.points.push_back(Vec{x});
    if (x > 0.3) {
      w.label_dist.push_back({0.0, 1.0});
      // Expert exactly wrong: m = 3 - y.
      w.expert_dist.push_back({{0.0, 1.0}, {1.0, 0.0}});
    } else {
      w.label_dist.push_back({0.5, 0.5});
      // Expert exactly right: m = y.
      w.expert_dist.push_back({{1.0, 0.0}, {0.0, 1.0}});
    }
  }
  w.validate();
  return w;
}

std::vector<Vec> theorem1_support(int d) {
  if (d < 1) throw OutOfRangeError("support budget d must be at least 1");
  std::vector<Vec> support;
  support.reserve(static_cast<std::size_t>(d) + 1);
  for (int i = 1; i <= d + 1; ++i) support.push_back(Vec{static_cast<double>(i)});
  return support;
}

AtomicWorld make_theorem1_world(int d, double eps, const FiniteClass& classH) {
  if (d < 1) throw OutOfRangeError("make_theorem1_world needs d >= 1");
  if (d > 30) throw SizeLimitError("make_theorem1_world enumeration capped at d = 30");
  if (!(eps >= 0.0 && eps < 1.0)) throw OutOfRangeError("eps must lie in [0, 1)");
  if (classH.size() == 0) throw EmptyDataError("make_theorem1_world needs a non-empty class");

  const int n_points = d + 1;
  const std::vector<Vec> support = theorem1_support(d);

  // First label assignment (lexicographic over {1,2}^(d+1), first point most
  // significant) that no class member fits on every point.
  std::vector<int> labels;
  const std::uint64_t n_assign = std::uint64_t{1} << n_points;
  for (std::uint64_t a = 0; a < n_assign && labels.empty(); ++a) {
    std::vector<int> cand(static_cast<std::size_t>(n_points));
    for (int p = 0; p < n_points; ++p) {
      const int bit = static_cast<int>((a >> (n_points - 1 - p)) & 1ULL);
      cand[static_cast<std::size_t>(p)] = 1 + bit;
    }
    bool fittable = false;
    for (std::size_t j = 0; j < classH.size() && !fittable; ++j) {
      bool fits = true;
      for (int p = 0; p < n_points && fits; ++p) {
        if (classH.eval(j, support[static_cast<std::size_t>(p)]) != cand[static_cast<std::size_t>(p)]) {
          fits = false;
        }
      }
      fittable = fits;
    }
    if (!fittable) labels = std::move(cand);
  }
  if (labels.empty()) {
    throw ConstructionFailedError("every label assignment is fittable by the given class");
  }

  AtomicWorld w;
  w.num_classes = 2;
  w.points = support;
  w.masses.resize(static_cast<std::size_t>(n_points));
  w.masses[0] = (1.0 + eps) / static_cast<double>(n_points);
  for (int p = 1; p < n_points - 1; ++p) {
    w.masses[static_cast<std::size_t>(p)] = 1.0 / static_cast<double>(n_points);
  }
  w.masses[static_cast<std::size_t>(n_points - 1)] = (1.0 - eps) / static_cast<double>(n_points);

  w.label_dist.resize(static_cast<std::size_t>(n_points));
  w.expert_dist.resize(static_cast<std::size_t>(n_points));
  for (int p = 0; p < n_points; ++p) {
    const int y = labels[static_cast<std::size_t>(p)];
    w.label_dist[static_cast<std::size_t>(p)] = (y == 1) ? std::vector<double>{1.0, 0.0}
                                                         : std::vector<double>{0.0, 1.0};
    // Expert right on every point but the last, where it is exactly wrong.
    const bool last = (p == n_points - 1);
    std::vector<std::vector<double>> rows(2);
    for (int yy = 1; yy <= 2; ++yy) {
      const int m = last ? (3 - yy) : yy;
      rows[static_cast<std::size_t>(yy - 1)] = (m == 1) ? std::vector<double>{1.0, 0.0}
                                                        : std::vector<double>{0.0, 1.0};
    }
    w.expert_dist[static_cast<std::size_t>(p)] = std::move(rows);
  }
  w.validate();
  return w;
}

CalCounterexample make_cal_counterexample_world() {
  CalCounterexample out;
  AtomicWorld& w = out.world;
  w.num_classes = 2;
  w.points = {Vec{0.0}, Vec{1.0}};
  w.masses = {0.5, 0.5};
  // Y encodes X: class 1 at x=0, class 2 at x=1; the expert is always right.
  w.label_dist = {{1.0, 0.0}, {0.0, 1.0}};
  w.expert_dist = {{{1.0, 0.0}, {0.0, 1.0}}, {{1.0, 0.0}, {0.0, 1.0}}};
  w.validate();

  out.classH = make_lookup_class(w.points, {{1, 2}, {1, 1}});
  out.classR = make_lookup_class(w.points, {{0, 1}, {0, 0}});
  return out;
}

AtomicWorld random_atomic_world(std::size_t support_size, int num_classes, std::uint64_t seed) {
  if (support_size == 0) throw EmptyDataError("random_atomic_world needs a non-empty support");
  if (num_classes < 2) throw OutOfRangeError("random_atomic_world needs at least two classes");
  Rng rng(hash_seed(seed, 0x77AA));
  AtomicWorld w;
  w.num_classes = num_classes;
  const std::size_t K = static_cast<std::size_t>(num_classes);

  w.points.reserve(support_size);
  for (std::size_t p = 0; p < support_size; ++p) w.points.push_back(Vec{static_cast<double>(p)});

  auto dirichlet = [&rng](std::size_t k) {
    std::vector<double> v(k);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      // Exponential draws normalized; clamp the uniform away from 0 so every
      // coordinate stays strictly positive.
      v[i] = -std::log(std::max(rng.uniform01(), 1e-12));
      total += v[i];
    }
    for (std::size_t i = 0; i < k; ++i) v[i] /= total;
    return v;
  };

  w.masses.resize(support_size);
  double mass_total = 0.0;
  for (std::size_t p = 0; p < support_size; ++p) {
    w.masses[p] = rng.uniform(0.1, 1.0);
    mass_total += w.masses[p];
  }
  for (std::size_t p = 0; p < support_size; ++p) w.masses[p] /= mass_total;

  w.label_dist.resize(support_size);
  w.expert_dist.resize(support_size);
  for (std::size_t p = 0; p < support_size; ++p) {
    w.label_dist[p] = dirichlet(K);
    w.expert_dist[p].resize(K);
    for (std::size_t y = 0; y < K; ++y) w.expert_dist[p][y] = dirichlet(K);
  }
  w.validate();
  return w;
}

}  // namespace deferlab
