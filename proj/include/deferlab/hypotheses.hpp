#pragma once

// Enumerable finite hypothesis classes and exhaustive empirical/exact risk
// minimization for classifiers, rejectors, and classifier-rejector pairs.

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "deferlab/core.hpp"

namespace deferlab {

enum class ClassKind { thresholds, support_bounded, lookup_tables };

// An ordered, immutable list of total functions. Three representations:
//   thresholds      — member j fires on one side of cuts[j] (scalar features);
//   support_bounded — all subsets of a candidate support of size <= d map to
//                     the positive output, everything else (including points
//                     off the support) to the negative output;
//   lookup_tables   — explicit output tables over an atomic support.
// Classifier classes emit labels in [1..K]; rejector / binary-predictor
// classes emit {0,1} (or {1,0} flags); the output values are data, so one
// type serves both.
struct FiniteClass {
  ClassKind kind = ClassKind::lookup_tables;

  // thresholds
  std::vector<double> cuts;
  bool positive_above = true;
  int positive_output = 2;
  int negative_output = 1;

  // support_bounded and lookup_tables
  std::vector<Vec> support;
  std::vector<std::vector<int>> tables;  // [member][support index] -> output

  std::size_t size() const {
    return kind == ClassKind::thresholds ? cuts.size() : tables.size();
  }

  int eval(std::size_t member, const Vec& x) const;

  // Member as a standalone callable (for DeferralSystem plumbing).
  std::function<int(const Vec&)> member_fn(std::size_t member) const;
};

FiniteClass make_threshold_class(std::vector<double> cuts, bool positive_above,
                                 int positive_output, int negative_output);

// All subsets of the candidate support with at most d positive points,
// enumerated by ascending subset bitmask (member 0 is the all-negative
// function). Requires support size <= 63.
FiniteClass make_support_bounded_class(std::vector<Vec> support, int d, int positive_output,
                                       int negative_output);

FiniteClass make_lookup_class(std::vector<Vec> support, std::vector<std::vector<int>> tables);

// Every classifier (K^s members) and every rejector (2^s members) on the
// world's support, as explicit lookup tables; the brute-force oracle behind
// Bayes-optimality checks. Caps default to s <= 6, K <= 3.
std::pair<FiniteClass, FiniteClass> enumerate_lookup_pairs(const AtomicWorld& world, int K,
                                                           std::size_t max_support = 6,
                                                           int max_classes = 3);

// ---- Empirical ERM (counts over a dataset) ------------------------------

// Lowest-index minimizer of sum I{h(x_i) != y_i}.
std::size_t erm_classifier(const FiniteClass& classH, const std::vector<Sample>& data);

// Lowest-index minimizer of the empirical 0-1 deferral loss with h fixed.
std::size_t erm_rejector(const FiniteClass& classR, const std::function<int(const Vec&)>& h,
                         const std::vector<Sample>& data);

// Exhaustive scan over classH x classR; lowest lexicographic (h, r) among the
// minimizers of the empirical 0-1 deferral loss.
std::pair<std::size_t, std::size_t> erm_joint(const FiniteClass& classH,
                                              const FiniteClass& classR,
                                              const std::vector<Sample>& data,
                                              std::uint64_t pair_cap = 10'000'000ULL);

// ---- Exact ERM (expectations over an atomic world) -----------------------

std::size_t erm_classifier_exact(const FiniteClass& classH, const AtomicWorld& world);

std::size_t erm_rejector_exact(const FiniteClass& classR, const std::function<int(const Vec&)>& h,
                               const AtomicWorld& world);

std::pair<std::size_t, std::size_t> erm_joint_exact(const FiniteClass& classH,
                                                    const FiniteClass& classR,
                                                    const AtomicWorld& world,
                                                    std::uint64_t pair_cap = 10'000'000ULL);

struct ErmPairResult {
  std::size_t h_index = 0;
  std::size_t r_index = 0;
  double risk = 0.0;
};

// Classifier first (average accuracy), then the rejector with the classifier
// frozen; exact risks throughout.
ErmPairResult staged_erm_exact(const FiniteClass& classH, const FiniteClass& classR,
                               const AtomicWorld& world);

// Global exact minimizer over the product class.
ErmPairResult joint_erm_exact(const FiniteClass& classH, const FiniteClass& classR,
                              const AtomicWorld& world, std::uint64_t pair_cap = 10'000'000ULL);

DeferralSystem make_system(const FiniteClass& classH, std::size_t h_index,
                           const FiniteClass& classR, std::size_t r_index);

}  // namespace deferlab
