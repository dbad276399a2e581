#include "deferlab/active.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "deferlab/errors.hpp"

namespace deferlab {

namespace {

struct Mask {
  std::vector<std::uint64_t> words;
  explicit Mask(std::size_t bits) : words((bits + 63) / 64, 0) {}
  void set(std::size_t i) { words[i >> 6] |= (std::uint64_t{1} << (i & 63)); }
};

// Number of violations of the stage-2 zero-loss condition for one triple:
// points the classifier gets wrong while kept, plus kept/deferred conflicts
// with the defer predictor.
std::size_t triple_violations(const Mask& h_err, const Mask& r_defer, const Mask& d_pos) {
  std::size_t total = 0;
  for (std::size_t w = 0; w < h_err.words.size(); ++w) {
    const std::uint64_t bad = (h_err.words[w] & ~r_defer.words[w]) | (r_defer.words[w] & d_pos.words[w]);
    total += static_cast<std::size_t>(__builtin_popcountll(bad));
  }
  return total;
}

}  // namespace

void PairVersionSpace::refresh_rejectors() {
  alive_rejectors.clear();
  alive_rejectors.reserve(alive.size());
  for (const auto& pair : alive) alive_rejectors.push_back(pair.second);
  std::sort(alive_rejectors.begin(), alive_rejectors.end());
  alive_rejectors.erase(std::unique(alive_rejectors.begin(), alive_rejectors.end()),
                        alive_rejectors.end());
}

PairVersionSpace init_pair_version_space(const FiniteClass& classH, const FiniteClass& classR,
                                         const std::vector<Sample>& pool) {
  if (pool.empty()) throw EmptyPoolError("init_pair_version_space needs a non-empty pool");
  if (classH.size() == 0 || classR.size() == 0) {
    throw EmptyDataError("version space needs non-empty classes");
  }
  const std::size_t n = pool.size();
  std::vector<Mask> h_err(classH.size(), Mask(n));
  for (std::size_t i = 0; i < classH.size(); ++i) {
    for (std::size_t p = 0; p < n; ++p) {
      if (classH.eval(i, pool[p].x) != pool[p].y) h_err[i].set(p);
    }
  }
  std::vector<Mask> keep(classR.size(), Mask(n));
  for (std::size_t j = 0; j < classR.size(); ++j) {
    for (std::size_t p = 0; p < n; ++p) {
      if (classR.eval(j, pool[p].x) != 1) keep[j].set(p);
    }
  }

  PairVersionSpace vs;
  vs.classH = &classH;
  vs.classR = &classR;
  for (std::size_t i = 0; i < classH.size(); ++i) {
    for (std::size_t j = 0; j < classR.size(); ++j) {
      bool ok = true;
      for (std::size_t w = 0; w < h_err[i].words.size() && ok; ++w) {
        if (h_err[i].words[w] & keep[j].words[w]) ok = false;
      }
      if (ok) vs.alive.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
    }
  }
  if (vs.alive.empty()) {
    throw EmptyVersionSpaceError("no classifier-rejector pair is consistent with the pool");
  }
  vs.refresh_rejectors();
  return vs;
}

bool dis_rejector(const PairVersionSpace& vs, const Vec& x) {
  if (vs.alive_rejectors.size() < 2) return false;
  const int first = vs.classR->eval(vs.alive_rejectors[0], x);
  for (std::size_t idx = 1; idx < vs.alive_rejectors.size(); ++idx) {
    if (vs.classR->eval(vs.alive_rejectors[idx], x) != first) return true;
  }
  return false;
}

PairRunResult rejector_disagreement_run(const FiniteClass& classH, const FiniteClass& classR,
                                        const WorldView& world, int queries_per_round, int rounds,
                                        std::uint64_t seed, const ActiveOptions& opts) {
  if (queries_per_round < 1 || rounds < 1) {
    throw OutOfRangeError("queries per round and rounds must be at least 1");
  }
  if (opts.pool_size == 0) throw EmptyPoolError("pool size must be positive");

  const std::vector<Sample> pool = sample_unlabeled(world, opts.pool_size, hash_seed(seed, 0xA001));
  PairVersionSpace vs = init_pair_version_space(classH, classR, pool);

  PairRunResult result;
  const std::uint64_t stream_seed = hash_seed(seed, 0xA002);
  std::uint64_t stream_index = 0;

  for (int round = 1; round <= rounds; ++round) {
    if (vs.alive_rejectors.size() <= 1) {
      // One surviving rejector means an empty disagreement region: no draw
      // can become a query, so declare convergence without burning budget.
      result.budget_exhausted = true;
      break;
    }
    // Scan the unlabeled stream for disagreement points; the expert is
    // consulted (same substream, so identical x and y) only on hits.
    std::vector<Sample> queried;
    std::int64_t draws = 0;
    while (static_cast<int>(queried.size()) < queries_per_round && draws < opts.budget_cap) {
      const Sample probe = world.draw(stream_seed, stream_index, false);
      ++draws;
      if (dis_rejector(vs, probe.x)) {
        queried.push_back(world.draw(stream_seed, stream_index, true));
      }
      ++stream_index;
    }
    if (static_cast<int>(queried.size()) < queries_per_round) result.budget_exhausted = true;
    result.labels_used += static_cast<std::int64_t>(queried.size());

    // Drop pairs that defer a point the expert got wrong.
    const std::size_t before = vs.alive.size();
    std::vector<std::pair<std::uint32_t, std::uint32_t>> next;
    next.reserve(vs.alive.size());
    for (const auto& pair : vs.alive) {
      bool ok = true;
      for (const Sample& q : queried) {
        if (classR.eval(pair.second, q.x) == 1 && q.y != *q.m) {
          ok = false;
          break;
        }
      }
      if (ok) next.push_back(pair);
    }
    vs.alive = std::move(next);
    if (vs.alive.empty()) {
      throw EmptyVersionSpaceError("every surviving pair defers a point the expert missed");
    }
    if (vs.alive.size() > before) throw Error("version space grew");  // monotonicity guard
    vs.refresh_rejectors();

    double dis_hits = 0.0;
    const std::uint64_t mc_seed = hash_seed(seed, 0xA100 + static_cast<std::uint64_t>(round));
    for (std::size_t i = 0; i < opts.dis_mc; ++i) {
      const Sample probe = world.draw(mc_seed, i, false);
      if (dis_rejector(vs, probe.x)) dis_hits += 1.0;
    }

    RoundRow row;
    row.round = round;
    row.labels_used = result.labels_used;
    row.version_space_size = vs.alive.size();
    row.dis_mass_estimate = dis_hits / static_cast<double>(opts.dis_mc);
    row.exact_risk = opts.risk_fn
                         ? opts.risk_fn(make_system(classH, vs.alive[0].first, classR, vs.alive[0].second))
                         : std::numeric_limits<double>::quiet_NaN();
    result.trace.push_back(row);
    if (result.budget_exhausted) break;
  }

  result.h_index = vs.alive[0].first;
  result.r_index = vs.alive[0].second;
  return result;
}

bool dis2(const PredictorVersionSpace& vs, const Vec& x) {
  if (vs.alive.size() < 2) return false;
  const int first = vs.classD->eval(vs.alive[0], x);
  for (std::size_t idx = 1; idx < vs.alive.size(); ++idx) {
    if (vs.classD->eval(vs.alive[idx], x) != first) return true;
  }
  return false;
}

DodResult dod_run(const FiniteClass& classD, const FiniteClass& classH, const FiniteClass& classR,
                  const WorldView& world, int rounds, int queries_per_round, std::size_t n_u,
                  std::uint64_t seed, const ActiveOptions& opts) {
  if (rounds < 0 || queries_per_round < 1) {
    throw OutOfRangeError("rounds must be non-negative and queries per round positive");
  }
  if (n_u == 0) throw EmptyDataError("stage 2 needs at least one unlabeled sample");
  if (classD.size() == 0 || classH.size() == 0 || classR.size() == 0) {
    throw EmptyDataError("dod_run needs non-empty classes");
  }

  // Stage-2 evaluation set, drawn once; only its (x, y) values are used.
  const std::vector<Sample> su = sample_unlabeled(world, n_u, hash_seed(seed, 0xB001));
  std::vector<Mask> h_err(classH.size(), Mask(n_u));
  for (std::size_t i = 0; i < classH.size(); ++i) {
    for (std::size_t p = 0; p < n_u; ++p) {
      if (classH.eval(i, su[p].x) != su[p].y) h_err[i].set(p);
    }
  }
  std::vector<Mask> r_defer(classR.size(), Mask(n_u));
  for (std::size_t j = 0; j < classR.size(); ++j) {
    for (std::size_t p = 0; p < n_u; ++p) {
      if (classR.eval(j, su[p].x) == 1) r_defer[j].set(p);
    }
  }
  std::vector<Mask> d_pos(classD.size(), Mask(n_u));
  for (std::size_t d = 0; d < classD.size(); ++d) {
    for (std::size_t p = 0; p < n_u; ++p) {
      if (classD.eval(d, su[p].x) == 1) d_pos[d].set(p);
    }
  }

  PredictorVersionSpace vs;
  vs.classD = &classD;
  vs.alive.resize(classD.size());
  for (std::size_t d = 0; d < classD.size(); ++d) vs.alive[d] = static_cast<std::uint32_t>(d);

  // First (d, h, r) in index order with zero violations; otherwise the first
  // triple attaining the minimum violation count, flagged.
  auto select = [&](const std::vector<std::uint32_t>& alive) {
    DodSelection best;
    std::size_t best_viol = std::numeric_limits<std::size_t>::max();
    for (std::uint32_t d : alive) {
      for (std::size_t hi = 0; hi < classH.size(); ++hi) {
        for (std::size_t ri = 0; ri < classR.size(); ++ri) {
          const std::size_t v = triple_violations(h_err[hi], r_defer[ri], d_pos[d]);
          if (v < best_viol) {
            best_viol = v;
            best = DodSelection{d, hi, ri, v == 0};
            if (v == 0) return best;
          }
        }
      }
    }
    return best;
  };

  DodResult result;
  const std::uint64_t stream_seed = hash_seed(seed, 0xB002);
  std::uint64_t stream_index = 0;

  for (int round = 1; round <= rounds; ++round) {
    if (vs.alive.size() <= 1) {
      // One surviving predictor means an empty disagreement region: no draw
      // can become a query, so declare convergence without burning budget.
      result.budget_exhausted = true;
      break;
    }
    std::vector<Sample> queried;
    std::int64_t draws = 0;
    while (static_cast<int>(queried.size()) < queries_per_round && draws < opts.budget_cap) {
      const Sample probe = world.draw(stream_seed, stream_index, false);
      ++draws;
      if (dis2(vs, probe.x)) {
        queried.push_back(world.draw(stream_seed, stream_index, true));
      }
      ++stream_index;
    }
    if (static_cast<int>(queried.size()) < queries_per_round) result.budget_exhausted = true;
    result.labels_used += static_cast<std::int64_t>(queried.size());

    // Keep predictors matching the observed defer indicator everywhere.
    std::vector<std::uint32_t> next;
    next.reserve(vs.alive.size());
    for (std::uint32_t d : vs.alive) {
      bool ok = true;
      for (const Sample& q : queried) {
        const int truth = (*q.m != q.y) ? 1 : 0;
        if ((classD.eval(d, q.x) == 1 ? 1 : 0) != truth) {
          ok = false;
          break;
        }
      }
      if (ok) next.push_back(d);
    }
    if (next.empty()) {
      // The class only approximately contains the true defer predictor and
      // this round's queries ruled out every member; fall back to the alive
      // members with the fewest mismatches on this round's queries (still a
      // subset, so the shrinkage invariant holds) and keep querying.
      result.version_space_collapsed = true;
      std::size_t best = std::numeric_limits<std::size_t>::max();
      std::vector<std::uint32_t> fewest;
      for (std::uint32_t d : vs.alive) {
        std::size_t mismatches = 0;
        for (const Sample& q : queried) {
          const int truth = (*q.m != q.y) ? 1 : 0;
          if ((classD.eval(d, q.x) == 1 ? 1 : 0) != truth) ++mismatches;
        }
        if (mismatches < best) {
          best = mismatches;
          fewest.clear();
        }
        if (mismatches == best) fewest.push_back(d);
      }
      next = std::move(fewest);
    }
    if (next.size() > vs.alive.size()) throw Error("version space grew");  // monotonicity guard
    vs.alive = std::move(next);

    double dis_hits = 0.0;
    const std::uint64_t mc_seed = hash_seed(seed, 0xB100 + static_cast<std::uint64_t>(round));
    for (std::size_t i = 0; i < opts.dis_mc; ++i) {
      const Sample probe = world.draw(mc_seed, i, false);
      if (dis2(vs, probe.x)) dis_hits += 1.0;
    }

    const DodSelection sel = select(vs.alive);
    result.per_round.push_back(sel);

    RoundRow row;
    row.round = round;
    row.labels_used = result.labels_used;
    row.version_space_size = vs.alive.size();
    row.dis_mass_estimate = dis_hits / static_cast<double>(opts.dis_mc);
    row.exact_risk = opts.risk_fn
                         ? opts.risk_fn(make_system(classH, sel.h_index, classR, sel.r_index))
                         : std::numeric_limits<double>::quiet_NaN();
    result.trace.push_back(row);
    if (result.budget_exhausted) break;
  }

  result.selection = result.per_round.empty() ? select(vs.alive) : result.per_round.back();
  return result;
}

double estimate_theta2(const FiniteClass& classD, std::size_t f_star, const WorldView& world,
                       const std::vector<double>& t_grid, std::size_t n_mc, std::uint64_t seed) {
  if (f_star >= classD.size()) throw OutOfRangeError("f_star index out of range");
  if (t_grid.empty()) throw EmptyDataError("estimate_theta2 needs a non-empty radius grid");
  if (n_mc == 0) throw EmptyDataError("estimate_theta2 needs at least one sample");
  for (double t : t_grid) {
    if (!(t > 0.0)) throw OutOfRangeError("radii must be positive");
  }

  // One shared sample for the ball radii and the disagreement masses.
  const std::uint64_t mc_seed = hash_seed(seed, 0xC001);
  std::vector<Vec> xs;
  xs.reserve(n_mc);
  for (std::size_t i = 0; i < n_mc; ++i) xs.push_back(world.draw(mc_seed, i, false).x);

  const std::size_t n_members = classD.size();
  std::vector<std::vector<std::int8_t>> out(n_members, std::vector<std::int8_t>(n_mc));
  for (std::size_t d = 0; d < n_members; ++d) {
    for (std::size_t i = 0; i < n_mc; ++i) {
      out[d][i] = static_cast<std::int8_t>(classD.eval(d, xs[i]));
    }
  }
  std::vector<double> dist(n_members, 0.0);
  for (std::size_t d = 0; d < n_members; ++d) {
    std::size_t diff = 0;
    for (std::size_t i = 0; i < n_mc; ++i) {
      if (out[d][i] != out[f_star][i]) ++diff;
    }
    dist[d] = static_cast<double>(diff) / static_cast<double>(n_mc);
  }

  double theta = 0.0;
  for (double t : t_grid) {
    std::vector<std::size_t> ball;
    for (std::size_t d = 0; d < n_members; ++d) {
      if (dist[d] <= t) ball.push_back(d);
    }
    std::size_t dis_count = 0;
    if (ball.size() >= 2) {
      for (std::size_t i = 0; i < n_mc; ++i) {
        const std::int8_t first = out[ball[0]][i];
        for (std::size_t b = 1; b < ball.size(); ++b) {
          if (out[ball[b]][i] != first) {
            ++dis_count;
            break;
          }
        }
      }
    }
    const double mass = static_cast<double>(dis_count) / static_cast<double>(n_mc);
    theta = std::max(theta, mass / t);
  }
  return theta;
}

}  // namespace deferlab
