#include "deferlab/core.hpp"

#include <cmath>
#include <string>

namespace deferlab {

CostSpec CostSpec::zero() {
  CostSpec s;
  s.c_ai = [](const Vec&, int, int) { return 0.0; };
  s.c_exp = [](const Vec&, int, int) { return 0.0; };
  return s;
}

std::size_t AtomicWorld::point_index(const Vec& x) const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i] == x) return i;
  }
  throw OutOfRangeError("point not in atomic world support");
}

namespace {

void check_prob_vector(const std::vector<double>& p, const std::string& what) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidDistributionError(what + ": entries must be finite and nonnegative");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw InvalidDistributionError(what + ": probabilities sum to " + std::to_string(sum));
  }
}

}  // namespace

void AtomicWorld::validate() const {
  const std::size_t s = points.size();
  if (s == 0) throw InvalidDistributionError("atomic world: empty support");
  if (num_classes < 2) throw InvalidDistributionError("atomic world: need K >= 2");
  if (masses.size() != s || label_dist.size() != s || expert_dist.size() != s) {
    throw DimensionMismatchError("atomic world: per-point arrays disagree with support size");
  }
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = i + 1; j < s; ++j) {
      if (points[i] == points[j]) {
        throw InvalidDistributionError("atomic world: duplicate support point");
      }
    }
  }
  check_prob_vector(masses, "point masses");
  for (std::size_t i = 0; i < s; ++i) {
    if (masses[i] <= 0.0) throw InvalidDistributionError("atomic world: zero-mass point");
    if (label_dist[i].size() != static_cast<std::size_t>(num_classes) ||
        expert_dist[i].size() != static_cast<std::size_t>(num_classes)) {
      throw DimensionMismatchError("atomic world: label/expert arrays must have K entries");
    }
    check_prob_vector(label_dist[i], "label distribution");
    for (int y = 0; y < num_classes; ++y) {
      if (expert_dist[i][y].size() != static_cast<std::size_t>(num_classes)) {
        throw DimensionMismatchError("atomic world: expert distribution must have K entries");
      }
      check_prob_vector(expert_dist[i][y], "expert distribution");
    }
  }
}

double deferral_loss_01(const DeferralSystem& system, const std::vector<Sample>& data) {
  return deferral_loss_general(system, data, CostSpec::zero());
}

double deferral_loss_general(const DeferralSystem& system, const std::vector<Sample>& data,
                             const CostSpec& costs) {
  if (data.empty()) throw EmptyDataError("deferral loss over empty data");
  double total = 0.0;
  for (const Sample& s : data) {
    if (system.r(s.x) == 0) {
      const int pred = system.h(s.x);
      total += (pred != s.y ? 1.0 : 0.0) + costs.c_ai(s.x, s.y, pred);
    } else {
      if (!s.m.has_value()) throw MissingExpertLabelError();
      total += (*s.m != s.y ? 1.0 : 0.0) + costs.c_exp(s.x, s.y, *s.m);
    }
  }
  return total / static_cast<double>(data.size());
}

double exact_deferral_risk(const DeferralSystem& system, const AtomicWorld& world) {
  double risk = 0.0;
  for (std::size_t i = 0; i < world.points.size(); ++i) {
    const Vec& x = world.points[i];
    double point_cost = 0.0;
    if (system.r(x) == 0) {
      const int pred = system.h(x);
      for (int y = 1; y <= world.num_classes; ++y) {
        if (pred != y) point_cost += world.label_dist[i][y - 1];
      }
    } else {
      for (int y = 1; y <= world.num_classes; ++y) {
        const double py = world.label_dist[i][y - 1];
        if (py == 0.0) continue;
        double expert_err = 0.0;
        for (int m = 1; m <= world.num_classes; ++m) {
          if (m != y) expert_err += world.expert_dist[i][y - 1][m - 1];
        }
        point_cost += py * expert_err;
      }
    }
    risk += world.masses[i] * point_cost;
  }
  return risk;
}

double exact_classification_risk(const std::function<int(const Vec&)>& h,
                                 const AtomicWorld& world) {
  double risk = 0.0;
  for (std::size_t i = 0; i < world.points.size(); ++i) {
    const int pred = h(world.points[i]);
    double err = 0.0;
    for (int y = 1; y <= world.num_classes; ++y) {
      if (pred != y) err += world.label_dist[i][y - 1];
    }
    risk += world.masses[i] * err;
  }
  return risk;
}

std::pair<int, int> decode_pair(int prediction, int num_classes) {
  if (prediction < 1 || prediction > num_classes + 1) {
    throw OutOfRangeError("decode_pair: prediction must lie in [1, K+1]");
  }
  if (prediction == num_classes + 1) return {1, 1};  // defer; label slot is a dummy
  return {prediction, 0};
}

}  // namespace deferlab
