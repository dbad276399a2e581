#pragma once

// Version-space active learning: disagreement sampling over
// classifier-rejector pairs (which can stall on worlds whose surviving
// rejectors never agree), and the two-stage variant that runs disagreement
// sampling on an auxiliary defer-predictor class first and then picks a
// consistent (predictor, classifier, rejector) triple without further expert
// labels.

#include <cstdint>
#include <functional>
#include <vector>

#include "deferlab/core.hpp"
#include "deferlab/hypotheses.hpp"
#include "deferlab/worlds.hpp"

namespace deferlab {

struct PairVersionSpace {
  const FiniteClass* classH = nullptr;
  const FiniteClass* classR = nullptr;
  // Surviving (h, r) index pairs, ascending lexicographic order.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> alive;
  // Distinct rejector indices appearing in alive, ascending.
  std::vector<std::uint32_t> alive_rejectors;
  void refresh_rejectors();
};

// Pairs consistent with a pool of expert-unlabeled samples: whenever the
// rejector keeps a pool point, the classifier must predict its label.
PairVersionSpace init_pair_version_space(const FiniteClass& classH, const FiniteClass& classR,
                                         const std::vector<Sample>& pool);

// x lies in the rejector disagreement region: two surviving rejectors differ.
bool dis_rejector(const PairVersionSpace& vs, const Vec& x);

struct RoundRow {
  int round = 0;                  // 1-based
  std::int64_t labels_used = 0;   // cumulative expert labels
  std::size_t version_space_size = 0;
  double dis_mass_estimate = 0.0;
  double exact_risk = 0.0;        // risk of the current selection (see risk_fn)
};

struct ActiveOptions {
  std::size_t pool_size = 300;       // expert-unlabeled pool for the initial filter
  std::int64_t budget_cap = 100000;  // max stream draws per round before declaring convergence
  std::size_t dis_mc = 10000;        // Monte Carlo draws per disagreement-mass estimate
  // Risk of a candidate system, for the trace; empirical or exact as the
  // caller prefers. Optional.
  std::function<double(const DeferralSystem&)> risk_fn;
};

struct PairRunResult {
  std::size_t h_index = 0;
  std::size_t r_index = 0;
  std::vector<RoundRow> trace;
  bool budget_exhausted = false;  // some round ran out of draws (treated as convergence)
  std::int64_t labels_used = 0;
};

// T rounds of k expert queries each, drawn from the rejector disagreement
// region; each round removes the pairs that defer a queried point on which
// the expert was wrong. Returns the lowest surviving pair. Throws
// EmptyVersionSpaceError if filtering removes everything.
PairRunResult rejector_disagreement_run(const FiniteClass& classH, const FiniteClass& classR,
                                        const WorldView& world, int queries_per_round, int rounds,
                                        std::uint64_t seed, const ActiveOptions& opts = {});

struct PredictorVersionSpace {
  const FiniteClass* classD = nullptr;
  std::vector<std::uint32_t> alive;  // ascending member indices
};

// x lies in the predictor disagreement region: two surviving predictors differ.
bool dis2(const PredictorVersionSpace& vs, const Vec& x);

struct DodSelection {
  std::size_t d_index = 0;
  std::size_t h_index = 0;
  std::size_t r_index = 0;
  bool consistent = true;  // false when no zero-violation triple exists
};

struct DodResult {
  DodSelection selection;                  // after the final round
  std::vector<DodSelection> per_round;     // selection after each round (aligned with trace)
  std::vector<RoundRow> trace;
  bool budget_exhausted = false;
  // Some round's exact filter would have emptied the predictor version space
  // (the class only approximately contains the true defer predictor). Such a
  // round keeps the alive members with the fewest mismatches on its queries
  // instead, so the space stays non-empty and still only shrinks.
  bool version_space_collapsed = false;
  std::int64_t labels_used = 0;
};

// Stage 1: disagreement sampling on the defer-predictor class, filtering on
// d(x) = I{expert wrong at x}. Stage 2: on n_u expert-unlabeled samples, the
// first (d, h, r) in index order (d outer, then h, then r) with zero
// violations of "r defers exactly where d predicts 1, and h is right
// wherever r keeps the point". Expert labels are spent only in stage 1.
// When no consistent triple exists, the triple with the fewest violations is
// returned with selection.consistent = false (never thrown, so sweeps can
// proceed; NoConsistentPairError is available to callers that must hard-fail).
DodResult dod_run(const FiniteClass& classD, const FiniteClass& classH, const FiniteClass& classR,
                  const WorldView& world, int rounds, int queries_per_round, std::size_t n_u,
                  std::uint64_t seed, const ActiveOptions& opts = {});

// max over the grid of P(DIS2 of the radius-t disagreement ball) / t, with
// both masses estimated on one shared sample of n_mc draws. The ball always
// contains f_star itself.
double estimate_theta2(const FiniteClass& classD, std::size_t f_star,
                       const WorldView& world, const std::vector<double>& t_grid,
                       std::size_t n_mc, std::uint64_t seed);

}  // namespace deferlab
