#pragma once

// Cost-sensitive surrogate losses over K+1 scores (K classes plus a defer
// head), their gradients, Bayes decision helpers, and the verification
// routines that check surrogate consistency and the calibration inequality
// by exhaustive enumeration.

#include <cstdint>
#include <functional>
#include <vector>

#include "deferlab/core.hpp"

namespace deferlab {

// ---- Numeric helpers ------------------------------------------------------

double logsumexp(const std::vector<double>& f);
std::vector<double> softmax(const std::vector<double>& f);
// Lowest index attaining the extremum (deterministic tie-break), 0-based.
std::size_t argmax_lowest(const std::vector<double>& v);
std::size_t argmin_lowest(const std::vector<double>& v);

// ---- Surrogate family -----------------------------------------------------

// A surrogate is a cost-weighted sum of per-head base losses,
//   loss(c, f) = sum_i [max_j c(j) - c(i)] * base(i, f),
// so heads with low cost get high weight. cost_weights computes the bracket.
std::vector<double> cost_weights(const std::vector<double>& costs);

// The 0-1 reduction's cost vector for a sample: c(i) = I{i != y} on the class
// heads and c(K+1) = I{expert wrong}.
std::vector<double> cost_vector_01(int y, bool expert_correct, int num_classes);

struct SurrogateSpec {
  enum class Kind { cross_entropy, weighted_quadratic, ust };
  Kind kind = Kind::cross_entropy;
  // ust: base(i, f) = u(f_i) + s(sum_j t(f_j)); the caller supplies the
  // pieces. Unused by the two built-ins.
  std::function<double(double)> u, t, s;
  static SurrogateSpec cross_entropy();
  static SurrogateSpec weighted_quadratic();
  static SurrogateSpec ust(std::function<double(double)> u, std::function<double(double)> t,
                           std::function<double(double)> s);
};

// Per-head base losses: cross_entropy is -log softmax_i(f); weighted
// quadratic is ||f - e_i||^2 (a ust instance up to an additive constant).
double surrogate_loss(const std::vector<double>& costs, const std::vector<double>& scores,
                      const SurrogateSpec& spec);

// Cross-entropy surrogate under the 0-1 reduction; scores has K+1 entries.
double lce_loss(int y, bool expert_correct, const std::vector<double>& scores);

// Analytic gradient of lce_loss in the scores: W * softmax(f) - w, where w
// are the cost weights and W their sum. Coordinates sum to zero.
std::vector<double> lce_gradient(int y, bool expert_correct, const std::vector<double>& scores);

// ---- Calibration ----------------------------------------------------------

// psi(x) = (C / M^(exponent-1)) * x^exponent; the cross-entropy instance uses
// exponent 2 and C = 1/(16K), i.e. psi(x) = x^2 / (16 M K).
struct CalibrationSpec {
  double M = 1.0;
  int K = 2;
  double exponent = 2.0;
  double C = 1.0;
  static CalibrationSpec lce(double M, int K);
};

double calibration_psi(double x, const CalibrationSpec& spec);

// ---- Pointwise Bayes structure ---------------------------------------------

// Lowest-index minimizer of the expected cost vector; 1-based action in
// [1..K+1] when given K+1 costs.
int bayes_action(const std::vector<double>& expected_costs);

// Scores minimizing the conditional cross-entropy surrogate when the
// normalized weight distribution is q: f = log q (clamped at log 1e-300 for
// zero entries). argmax of the result decodes to the Bayes action.
std::vector<double> conditional_surrogate_minimizer(const std::vector<double>& q);

// ---- Verification ---------------------------------------------------------

struct VerifyReport {
  std::uint64_t trials = 0;
  std::uint64_t violations = 0;
  double max_violation = 0.0;
  std::uint64_t seed = 0;
};

// For every support point of the world: compute the expected cost of each of
// the K+1 actions and the normalized expected weights q by exhaustive
// enumeration over (y, m); check that decoding the conditional surrogate
// minimizer picks exactly the Bayes action (ties resolved lowest-index on
// both sides). trials counts points checked; max_violation is the largest
// excess expected cost among mismatches.
VerifyReport verify_consistency(const AtomicWorld& world);

// Random single-point distributions and score vectors; checks
// psi(excess deferral risk) <= excess surrogate risk + 1e-9 with both sides
// computed in closed form from the enumerated conditional distribution
// (the surrogate minimum is attained at softmax(f) = q). K is the number of
// classes; M = 1 matches the 0-1 reduction.
VerifyReport verify_calibration(std::uint64_t n_trials, std::uint64_t seed, int num_classes,
                                double M = 1.0);

// Central-difference check of lce_gradient on random (y, expert_correct, f)
// draws; violations counts coordinates whose relative error reaches tol.
// flip_sign negates the analytic gradient first (a deliberate mutation used
// to prove the check can fail).
VerifyReport verify_gradient(std::uint64_t n_checks, std::uint64_t seed, double step = 1e-5,
                             double tol = 1e-5, bool flip_sign = false);

}  // namespace deferlab
