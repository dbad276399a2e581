#include "deferlab/surrogates.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "deferlab/errors.hpp"
#include "deferlab/rng.hpp"

namespace deferlab {

double logsumexp(const std::vector<double>& f) {
  if (f.empty()) throw EmptyDataError("logsumexp needs at least one score");
  const double hi = *std::max_element(f.begin(), f.end());
  double total = 0.0;
  for (double v : f) total += std::exp(v - hi);
  return hi + std::log(total);
}

std::vector<double> softmax(const std::vector<double>& f) {
  const double lse = logsumexp(f);
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::exp(f[i] - lse);
  return out;
}

std::size_t argmax_lowest(const std::vector<double>& v) {
  if (v.empty()) throw EmptyDataError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

std::size_t argmin_lowest(const std::vector<double>& v) {
  if (v.empty()) throw EmptyDataError("argmin of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[best]) best = i;
  }
  return best;
}

std::vector<double> cost_weights(const std::vector<double>& costs) {
  if (costs.empty()) throw EmptyDataError("cost_weights needs a non-empty cost vector");
  for (double c : costs) {
    if (c < 0.0) throw NegativeInputError("costs must be non-negative");
  }
  const double hi = *std::max_element(costs.begin(), costs.end());
  std::vector<double> w(costs.size());
  for (std::size_t i = 0; i < costs.size(); ++i) w[i] = hi - costs[i];
  return w;
}

std::vector<double> cost_vector_01(int y, bool expert_correct, int num_classes) {
  if (num_classes < 2) throw OutOfRangeError("cost_vector_01 needs at least two classes");
  if (y < 1 || y > num_classes) throw OutOfRangeError("label out of range");
  std::vector<double> c(static_cast<std::size_t>(num_classes) + 1, 1.0);
  c[static_cast<std::size_t>(y - 1)] = 0.0;
  c[static_cast<std::size_t>(num_classes)] = expert_correct ? 0.0 : 1.0;
  return c;
}

SurrogateSpec SurrogateSpec::cross_entropy() { return SurrogateSpec{}; }

SurrogateSpec SurrogateSpec::weighted_quadratic() {
  SurrogateSpec s;
  s.kind = Kind::weighted_quadratic;
  return s;
}

SurrogateSpec SurrogateSpec::ust(std::function<double(double)> u, std::function<double(double)> t,
                                 std::function<double(double)> s) {
  SurrogateSpec spec;
  spec.kind = Kind::ust;
  spec.u = std::move(u);
  spec.t = std::move(t);
  spec.s = std::move(s);
  if (!spec.u || !spec.t || !spec.s) throw Error("ust surrogate needs all three pieces");
  return spec;
}

double surrogate_loss(const std::vector<double>& costs, const std::vector<double>& scores,
                      const SurrogateSpec& spec) {
  if (costs.size() != scores.size()) {
    throw DimensionMismatchError("cost and score vectors must have equal length");
  }
  if (costs.size() < 2) throw DimensionMismatchError("surrogate needs at least two heads");
  const std::vector<double> w = cost_weights(costs);

  double loss = 0.0;
  switch (spec.kind) {
    case SurrogateSpec::Kind::cross_entropy: {
      const double lse = logsumexp(scores);
      for (std::size_t i = 0; i < w.size(); ++i) loss += w[i] * (lse - scores[i]);
      break;
    }
    case SurrogateSpec::Kind::weighted_quadratic: {
      double sq = 0.0;
      for (double v : scores) sq += v * v;
      for (std::size_t i = 0; i < w.size(); ++i) loss += w[i] * (sq - 2.0 * scores[i] + 1.0);
      break;
    }
    case SurrogateSpec::Kind::ust: {
      if (!spec.u || !spec.t || !spec.s) throw Error("ust surrogate needs all three pieces");
      double total_t = 0.0;
      for (double v : scores) total_t += spec.t(v);
      const double shared = spec.s(total_t);
      for (std::size_t i = 0; i < w.size(); ++i) loss += w[i] * (spec.u(scores[i]) + shared);
      break;
    }
  }
  return loss;
}

double lce_loss(int y, bool expert_correct, const std::vector<double>& scores) {
  if (scores.size() < 3) throw DimensionMismatchError("lce_loss needs K+1 >= 3 scores");
  const int K = static_cast<int>(scores.size()) - 1;
  const std::vector<double> costs = cost_vector_01(y, expert_correct, K);
  return surrogate_loss(costs, scores, SurrogateSpec::cross_entropy());
}

std::vector<double> lce_gradient(int y, bool expert_correct, const std::vector<double>& scores) {
  if (scores.size() < 3) throw DimensionMismatchError("lce_gradient needs K+1 >= 3 scores");
  const int K = static_cast<int>(scores.size()) - 1;
  const std::vector<double> w = cost_weights(cost_vector_01(y, expert_correct, K));
  double W = 0.0;
  for (double v : w) W += v;
  const std::vector<double> p = softmax(scores);
  std::vector<double> g(scores.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = W * p[i] - w[i];
  return g;
}

CalibrationSpec CalibrationSpec::lce(double M, int K) {
  if (M <= 0.0) throw OutOfRangeError("cost bound M must be positive");
  if (K < 2) throw OutOfRangeError("calibration needs at least two classes");
  CalibrationSpec s;
  s.M = M;
  s.K = K;
  s.exponent = 2.0;
  s.C = 1.0 / (16.0 * static_cast<double>(K));
  return s;
}

double calibration_psi(double x, const CalibrationSpec& spec) {
  if (x < 0.0) throw NegativeInputError("calibration_psi domain is x >= 0");
  if (spec.M <= 0.0) throw OutOfRangeError("cost bound M must be positive");
  if (spec.C <= 0.0) throw OutOfRangeError("calibration constant must be positive");
  return (spec.C / std::pow(spec.M, spec.exponent - 1.0)) * std::pow(x, spec.exponent);
}

int bayes_action(const std::vector<double>& expected_costs) {
  if (expected_costs.empty()) throw EmptyDataError("bayes_action needs a non-empty cost vector");
  return static_cast<int>(argmin_lowest(expected_costs)) + 1;
}

std::vector<double> conditional_surrogate_minimizer(const std::vector<double>& q) {
  if (q.empty()) throw EmptyDataError("minimizer needs a non-empty distribution");
  double total = 0.0;
  for (double v : q) {
    if (v < 0.0) throw NegativeInputError("q must be non-negative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidDistributionError("q must sum to 1");
  }
  std::vector<double> f(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) f[i] = std::log(std::max(q[i], 1e-300));
  return f;
}

// ---- Verification ----------------------------------------------------------

namespace {

std::vector<double> dirichlet_draw(Rng& rng, std::size_t k) {
  std::vector<double> v(k);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    v[i] = -std::log(std::max(rng.uniform01(), 1e-12));
    total += v[i];
  }
  for (std::size_t i = 0; i < k; ++i) v[i] /= total;
  return v;
}

// Expected costs and expected weights of the K+1 actions under the 0-1
// reduction, by enumerating the (y, m) realizations of one conditional
// distribution. Costs carry an optional scale (bound M).
struct ConditionalMoments {
  std::vector<double> expected_cost;    // length K+1
  std::vector<double> expected_weight;  // length K+1
  double weight_total = 0.0;
};

ConditionalMoments enumerate_moments(const std::vector<double>& p_y,
                                     const std::vector<std::vector<double>>& p_m_given_y,
                                     double scale) {
  const int K = static_cast<int>(p_y.size());
  ConditionalMoments out;
  out.expected_cost.assign(static_cast<std::size_t>(K) + 1, 0.0);
  out.expected_weight.assign(static_cast<std::size_t>(K) + 1, 0.0);
  for (int y = 1; y <= K; ++y) {
    for (int m = 1; m <= K; ++m) {
      const double prob =
          p_y[static_cast<std::size_t>(y - 1)] * p_m_given_y[static_cast<std::size_t>(y - 1)][static_cast<std::size_t>(m - 1)];
      if (prob == 0.0) continue;
      std::vector<double> c = cost_vector_01(y, m == y, K);
      double hi = 0.0;
      for (double& v : c) {
        v *= scale;
        hi = std::max(hi, v);
      }
      for (int i = 0; i <= K; ++i) {
        out.expected_cost[static_cast<std::size_t>(i)] += prob * c[static_cast<std::size_t>(i)];
        out.expected_weight[static_cast<std::size_t>(i)] += prob * (hi - c[static_cast<std::size_t>(i)]);
      }
    }
  }
  for (double v : out.expected_weight) out.weight_total += v;
  return out;
}

}  // namespace

VerifyReport verify_consistency(const AtomicWorld& world) {
  world.validate();
  VerifyReport report;
  for (std::size_t p = 0; p < world.support_size(); ++p) {
    ++report.trials;
    const ConditionalMoments mom = enumerate_moments(world.label_dist[p], world.expert_dist[p], 1.0);
    if (mom.weight_total <= 0.0) continue;  // all actions tie; nothing to check
    std::vector<double> q(mom.expected_weight);
    for (double& v : q) v /= mom.weight_total;
    const std::vector<double> f = conditional_surrogate_minimizer(q);
    const int decoded = static_cast<int>(argmax_lowest(f)) + 1;
    const int bayes = bayes_action(mom.expected_cost);
    if (decoded != bayes) {
      ++report.violations;
      const double excess = mom.expected_cost[static_cast<std::size_t>(decoded - 1)] -
                            mom.expected_cost[static_cast<std::size_t>(bayes - 1)];
      report.max_violation = std::max(report.max_violation, excess);
    }
  }
  return report;
}

VerifyReport verify_calibration(std::uint64_t n_trials, std::uint64_t seed, int num_classes,
                                double M) {
  if (num_classes < 2) throw OutOfRangeError("verify_calibration needs at least two classes");
  if (M <= 0.0) throw OutOfRangeError("cost bound M must be positive");
  const std::size_t K = static_cast<std::size_t>(num_classes);
  const CalibrationSpec psi_spec = CalibrationSpec::lce(M, num_classes);
  static constexpr double kScales[] = {0.5, 2.0, 10.0, 1000.0};

  VerifyReport report;
  report.seed = seed;
  for (std::uint64_t t = 0; t < n_trials; ++t) {
    Rng rng(hash_seed(seed, t));
    const std::vector<double> p_y = dirichlet_draw(rng, K);
    std::vector<std::vector<double>> p_m(K);
    for (std::size_t y = 0; y < K; ++y) p_m[y] = dirichlet_draw(rng, K);
    const double scale = kScales[t % 4];
    std::vector<double> f(K + 1);
    for (double& v : f) v = scale * rng.normal();

    const ConditionalMoments mom = enumerate_moments(p_y, p_m, M);
    if (mom.weight_total <= 0.0) continue;
    const std::size_t a = argmax_lowest(f);
    const double min_cost = *std::min_element(mom.expected_cost.begin(), mom.expected_cost.end());
    const double delta_l = mom.expected_cost[a] - min_cost;

    // Excess conditional surrogate risk in closed form: the conditional
    // surrogate equals N * CE(P, softmax(f)) up to the constant N * H(P), so
    // the excess is N * KL(P || softmax(f)), with P the normalized weights.
    const double lse = logsumexp(f);
    double delta_s = 0.0;
    for (std::size_t i = 0; i < mom.expected_weight.size(); ++i) {
      const double wi = mom.expected_weight[i];
      if (wi <= 0.0) continue;
      const double pi = wi / mom.weight_total;
      delta_s += wi * (std::log(pi) - (f[i] - lse));
    }

    ++report.trials;
    const double v = calibration_psi(delta_l, psi_spec) - delta_s;
    if (v > 1e-9) {
      ++report.violations;
      report.max_violation = std::max(report.max_violation, v);
    }
  }
  return report;
}

VerifyReport verify_gradient(std::uint64_t n_checks, std::uint64_t seed, double step, double tol,
                             bool flip_sign) {
  static constexpr int kClassCounts[] = {2, 3, 10};
  VerifyReport report;
  report.seed = seed;
  for (std::uint64_t t = 0; t < n_checks; ++t) {
    Rng rng(hash_seed(seed, t));
    const int K = kClassCounts[t % 3];
    const int y = static_cast<int>(rng.uniform_int(1, K));
    const bool expert_correct = rng.bernoulli(0.5);
    std::vector<double> f(static_cast<std::size_t>(K) + 1);
    for (double& v : f) v = 2.0 * rng.normal();

    std::vector<double> g = lce_gradient(y, expert_correct, f);
    if (flip_sign) {
      for (double& v : g) v = -v;
    }
    ++report.trials;
    for (std::size_t j = 0; j < f.size(); ++j) {
      std::vector<double> hi = f, lo = f;
      hi[j] += step;
      lo[j] -= step;
      const double numeric = (lce_loss(y, expert_correct, hi) - lce_loss(y, expert_correct, lo)) /
                             (2.0 * step);
      // Normalized by max(1, |numeric|): absolute near zero, relative for
      // large entries.
      const double err = std::abs(g[j] - numeric) / std::max(1.0, std::abs(numeric));
      report.max_violation = std::max(report.max_violation, err);
      if (err >= tol) ++report.violations;
    }
  }
  return report;
}

}  // namespace deferlab
