#include "deferlab/hypotheses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "deferlab/errors.hpp"

namespace deferlab {

namespace {

std::size_t find_support_index(const std::vector<Vec>& support, const Vec& x) {
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] == x) return i;
  }
  return static_cast<std::size_t>(-1);
}

// Fixed-width bitset over dataset rows; one lane per sample.
struct Mask {
  std::vector<std::uint64_t> words;
  explicit Mask(std::size_t bits) : words((bits + 63) / 64, 0) {}
  void set(std::size_t i) { words[i >> 6] |= (std::uint64_t{1} << (i & 63)); }
};

std::size_t count_and_not(const Mask& a, const Mask& b) {
  std::size_t total = 0;
  for (std::size_t w = 0; w < a.words.size(); ++w) {
    total += static_cast<std::size_t>(__builtin_popcountll(a.words[w] & ~b.words[w]));
  }
  return total;
}

std::size_t count_and(const Mask& a, const Mask& b) {
  std::size_t total = 0;
  for (std::size_t w = 0; w < a.words.size(); ++w) {
    total += static_cast<std::size_t>(__builtin_popcountll(a.words[w] & b.words[w]));
  }
  return total;
}

}  // namespace

int FiniteClass::eval(std::size_t member, const Vec& x) const {
  if (member >= size()) {
    throw OutOfRangeError("class member index " + std::to_string(member) + " out of range for class of size " +
                          std::to_string(size()));
  }
  switch (kind) {
    case ClassKind::thresholds: {
      if (x.empty()) throw DimensionMismatchError("threshold member needs a scalar feature");
      const bool above = x[0] > cuts[member];
      return (above == positive_above) ? positive_output : negative_output;
    }
    case ClassKind::support_bounded: {
      const std::size_t idx = find_support_index(support, x);
      if (idx == static_cast<std::size_t>(-1)) return negative_output;
      return tables[member][idx];
    }
    case ClassKind::lookup_tables: {
      const std::size_t idx = find_support_index(support, x);
      if (idx == static_cast<std::size_t>(-1)) {
        throw OutOfRangeError("point is not in the lookup class support");
      }
      return tables[member][idx];
    }
  }
  throw Error("unreachable class kind");
}

std::function<int(const Vec&)> FiniteClass::member_fn(std::size_t member) const {
  if (member >= size()) {
    throw OutOfRangeError("class member index out of range");
  }
  FiniteClass copy = *this;
  return [copy, member](const Vec& x) { return copy.eval(member, x); };
}

FiniteClass make_threshold_class(std::vector<double> cuts, bool positive_above,
                                 int positive_output, int negative_output) {
  if (cuts.empty()) throw EmptyDataError("threshold class needs at least one cut");
  FiniteClass c;
  c.kind = ClassKind::thresholds;
  c.cuts = std::move(cuts);
  c.positive_above = positive_above;
  c.positive_output = positive_output;
  c.negative_output = negative_output;
  return c;
}

FiniteClass make_support_bounded_class(std::vector<Vec> support, int d, int positive_output,
                                       int negative_output) {
  if (support.empty()) throw EmptyDataError("support-bounded class needs a non-empty support");
  if (support.size() > 63) throw SizeLimitError("support-bounded class support capped at 63 points");
  if (d < 0) throw OutOfRangeError("support budget d must be non-negative");
  const std::size_t s = support.size();
  FiniteClass c;
  c.kind = ClassKind::support_bounded;
  c.support = std::move(support);
  c.positive_output = positive_output;
  c.negative_output = negative_output;
  // Subsets in ascending bitmask order; bit p of the mask marks support point
  // p as positive. Member 0 is therefore the all-negative function.
  const std::uint64_t limit = std::uint64_t{1} << s;
  for (std::uint64_t mask = 0; mask < limit; ++mask) {
    if (__builtin_popcountll(mask) > d) continue;
    std::vector<int> table(s, negative_output);
    for (std::size_t p = 0; p < s; ++p) {
      if (mask & (std::uint64_t{1} << p)) table[p] = positive_output;
    }
    c.tables.push_back(std::move(table));
  }
  return c;
}

FiniteClass make_lookup_class(std::vector<Vec> support, std::vector<std::vector<int>> tables) {
  if (support.empty()) throw EmptyDataError("lookup class needs a non-empty support");
  if (tables.empty()) throw EmptyDataError("lookup class needs at least one table");
  for (const auto& t : tables) {
    if (t.size() != support.size()) {
      throw DimensionMismatchError("lookup table length must match the support size");
    }
  }
  FiniteClass c;
  c.kind = ClassKind::lookup_tables;
  c.support = std::move(support);
  c.tables = std::move(tables);
  return c;
}

std::pair<FiniteClass, FiniteClass> enumerate_lookup_pairs(const AtomicWorld& world, int K,
                                                           std::size_t max_support,
                                                           int max_classes) {
  world.validate();
  if (K != world.num_classes) {
    throw DimensionMismatchError("class count K must match the world's class count");
  }
  const std::size_t s = world.support_size();
  if (s > max_support || K > max_classes) {
    throw SizeLimitError("enumeration capped at " + std::to_string(max_support) + " support points and " +
                         std::to_string(max_classes) + " classes");
  }

  // Classifiers: all K^s tables; member index read in base K with support
  // point 0 as the least significant digit. Rejectors: all 2^s defer flags,
  // bit p of the member index flagging point p.
  std::uint64_t n_cls = 1;
  for (std::size_t p = 0; p < s; ++p) n_cls *= static_cast<std::uint64_t>(K);

  FiniteClass classifiers;
  classifiers.kind = ClassKind::lookup_tables;
  classifiers.support = world.points;
  classifiers.tables.reserve(n_cls);
  for (std::uint64_t m = 0; m < n_cls; ++m) {
    std::vector<int> table(s);
    std::uint64_t rem = m;
    for (std::size_t p = 0; p < s; ++p) {
      table[p] = 1 + static_cast<int>(rem % static_cast<std::uint64_t>(K));
      rem /= static_cast<std::uint64_t>(K);
    }
    classifiers.tables.push_back(std::move(table));
  }

  FiniteClass rejectors;
  rejectors.kind = ClassKind::lookup_tables;
  rejectors.support = world.points;
  const std::uint64_t n_rej = std::uint64_t{1} << s;
  rejectors.tables.reserve(n_rej);
  for (std::uint64_t m = 0; m < n_rej; ++m) {
    std::vector<int> table(s, 0);
    for (std::size_t p = 0; p < s; ++p) {
      if (m & (std::uint64_t{1} << p)) table[p] = 1;
    }
    rejectors.tables.push_back(std::move(table));
  }

  return {std::move(classifiers), std::move(rejectors)};
}

// ---- Empirical ERM --------------------------------------------------------

std::size_t erm_classifier(const FiniteClass& classH, const std::vector<Sample>& data) {
  if (data.empty()) throw EmptyDataError("erm_classifier needs a non-empty dataset");
  std::size_t best = 0;
  std::size_t best_err = std::numeric_limits<std::size_t>::max();
  for (std::size_t j = 0; j < classH.size(); ++j) {
    std::size_t err = 0;
    for (const Sample& s : data) {
      if (classH.eval(j, s.x) != s.y) ++err;
    }
    if (err < best_err) {
      best_err = err;
      best = j;
    }
  }
  return best;
}

std::size_t erm_rejector(const FiniteClass& classR, const std::function<int(const Vec&)>& h,
                         const std::vector<Sample>& data) {
  if (data.empty()) throw EmptyDataError("erm_rejector needs a non-empty dataset");
  // Cache the frozen classifier's mistakes once.
  std::vector<char> h_err(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) h_err[i] = (h(data[i].x) != data[i].y) ? 1 : 0;

  std::size_t best = 0;
  std::size_t best_err = std::numeric_limits<std::size_t>::max();
  for (std::size_t j = 0; j < classR.size(); ++j) {
    std::size_t err = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (classR.eval(j, data[i].x) == 1) {
        if (!data[i].m.has_value()) {
          throw MissingExpertLabelError("rejector defers on a sample without an expert prediction");
        }
        if (*data[i].m != data[i].y) ++err;
      } else {
        err += h_err[i];
      }
    }
    if (err < best_err) {
      best_err = err;
      best = j;
    }
  }
  return best;
}

std::pair<std::size_t, std::size_t> erm_joint(const FiniteClass& classH,
                                              const FiniteClass& classR,
                                              const std::vector<Sample>& data,
                                              std::uint64_t pair_cap) {
  if (data.empty()) throw EmptyDataError("erm_joint needs a non-empty dataset");
  const std::uint64_t pairs =
      static_cast<std::uint64_t>(classH.size()) * static_cast<std::uint64_t>(classR.size());
  if (pairs > pair_cap) {
    throw SizeLimitError("pair class size " + std::to_string(pairs) + " exceeds the cap " +
                         std::to_string(pair_cap));
  }

  const std::size_t n = data.size();
  std::vector<Mask> h_err(classH.size(), Mask(n));
  for (std::size_t j = 0; j < classH.size(); ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (classH.eval(j, data[i].x) != data[i].y) h_err[j].set(i);
    }
  }
  std::vector<Mask> defer(classR.size(), Mask(n));
  Mask exp_err(n);
  std::vector<char> needs_m(n, 0);
  for (std::size_t j = 0; j < classR.size(); ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (classR.eval(j, data[i].x) == 1) {
        defer[j].set(i);
        needs_m[i] = 1;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (needs_m[i] && !data[i].m.has_value()) {
      throw MissingExpertLabelError("some candidate rejector defers on a sample without an expert prediction");
    }
    if (data[i].m.has_value() && *data[i].m != data[i].y) exp_err.set(i);
  }

  std::size_t best_h = 0, best_r = 0;
  std::size_t best_err = std::numeric_limits<std::size_t>::max();
  for (std::size_t hi = 0; hi < classH.size(); ++hi) {
    for (std::size_t ri = 0; ri < classR.size(); ++ri) {
      const std::size_t err = count_and_not(h_err[hi], defer[ri]) + count_and(exp_err, defer[ri]);
      if (err < best_err) {
        best_err = err;
        best_h = hi;
        best_r = ri;
      }
    }
  }
  return {best_h, best_r};
}

// ---- Exact ERM ------------------------------------------------------------

namespace {

// Per-point exact error rates, accumulated in support order.
struct ExactTables {
  std::vector<double> exp_err;                  // P(M != Y | x_p)
  std::vector<std::vector<double>> cls_err;     // [member][point] P(h != Y | x_p)
};

std::vector<double> expert_error_by_point(const AtomicWorld& world) {
  const std::size_t s = world.support_size();
  std::vector<double> out(s, 0.0);
  for (std::size_t p = 0; p < s; ++p) {
    double e = 0.0;
    for (int y = 1; y <= world.num_classes; ++y) {
      const double py = world.label_dist[p][static_cast<std::size_t>(y - 1)];
      double wrong = 0.0;
      for (int m = 1; m <= world.num_classes; ++m) {
        if (m != y) wrong += world.expert_dist[p][static_cast<std::size_t>(y - 1)][static_cast<std::size_t>(m - 1)];
      }
      e += py * wrong;
    }
    out[p] = e;
  }
  return out;
}

std::vector<std::vector<double>> classifier_error_by_point(const FiniteClass& classH,
                                                           const AtomicWorld& world) {
  const std::size_t s = world.support_size();
  std::vector<std::vector<double>> out(classH.size(), std::vector<double>(s, 0.0));
  for (std::size_t j = 0; j < classH.size(); ++j) {
    for (std::size_t p = 0; p < s; ++p) {
      const int pred = classH.eval(j, world.points[p]);
      double e = 0.0;
      for (int y = 1; y <= world.num_classes; ++y) {
        if (pred != y) e += world.label_dist[p][static_cast<std::size_t>(y - 1)];
      }
      out[j][p] = e;
    }
  }
  return out;
}

}  // namespace

std::size_t erm_classifier_exact(const FiniteClass& classH, const AtomicWorld& world) {
  world.validate();
  if (classH.size() == 0) throw EmptyDataError("erm_classifier_exact needs a non-empty class");
  std::size_t best = 0;
  double best_risk = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < classH.size(); ++j) {
    const double risk = exact_classification_risk(classH.member_fn(j), world);
    if (risk < best_risk) {
      best_risk = risk;
      best = j;
    }
  }
  return best;
}

std::size_t erm_rejector_exact(const FiniteClass& classR, const std::function<int(const Vec&)>& h,
                               const AtomicWorld& world) {
  world.validate();
  if (classR.size() == 0) throw EmptyDataError("erm_rejector_exact needs a non-empty class");
  std::size_t best = 0;
  double best_risk = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < classR.size(); ++j) {
    DeferralSystem sys{h, classR.member_fn(j)};
    const double risk = exact_deferral_risk(sys, world);
    if (risk < best_risk) {
      best_risk = risk;
      best = j;
    }
  }
  return best;
}

std::pair<std::size_t, std::size_t> erm_joint_exact(const FiniteClass& classH,
                                                    const FiniteClass& classR,
                                                    const AtomicWorld& world,
                                                    std::uint64_t pair_cap) {
  world.validate();
  if (classH.size() == 0 || classR.size() == 0) {
    throw EmptyDataError("erm_joint_exact needs non-empty classes");
  }
  const std::uint64_t pairs =
      static_cast<std::uint64_t>(classH.size()) * static_cast<std::uint64_t>(classR.size());
  if (pairs > pair_cap) {
    throw SizeLimitError("pair class size " + std::to_string(pairs) + " exceeds the cap " +
                         std::to_string(pair_cap));
  }
  const std::size_t s = world.support_size();
  const std::vector<double> exp_err = expert_error_by_point(world);
  const std::vector<std::vector<double>> cls_err = classifier_error_by_point(classH, world);
  std::vector<std::vector<char>> defer(classR.size(), std::vector<char>(s, 0));
  for (std::size_t j = 0; j < classR.size(); ++j) {
    for (std::size_t p = 0; p < s; ++p) {
      defer[j][p] = (classR.eval(j, world.points[p]) == 1) ? 1 : 0;
    }
  }

  std::size_t best_h = 0, best_r = 0;
  double best_risk = std::numeric_limits<double>::infinity();
  for (std::size_t hi = 0; hi < classH.size(); ++hi) {
    for (std::size_t ri = 0; ri < classR.size(); ++ri) {
      double risk = 0.0;
      for (std::size_t p = 0; p < s; ++p) {
        risk += world.masses[p] * (defer[ri][p] ? exp_err[p] : cls_err[hi][p]);
      }
      if (risk < best_risk) {
        best_risk = risk;
        best_h = hi;
        best_r = ri;
      }
    }
  }
  return {best_h, best_r};
}

ErmPairResult staged_erm_exact(const FiniteClass& classH, const FiniteClass& classR,
                               const AtomicWorld& world) {
  ErmPairResult out;
  out.h_index = erm_classifier_exact(classH, world);
  auto h = classH.member_fn(out.h_index);
  out.r_index = erm_rejector_exact(classR, h, world);
  out.risk = exact_deferral_risk(make_system(classH, out.h_index, classR, out.r_index), world);
  return out;
}

ErmPairResult joint_erm_exact(const FiniteClass& classH, const FiniteClass& classR,
                              const AtomicWorld& world, std::uint64_t pair_cap) {
  ErmPairResult out;
  auto [hi, ri] = erm_joint_exact(classH, classR, world, pair_cap);
  out.h_index = hi;
  out.r_index = ri;
  out.risk = exact_deferral_risk(make_system(classH, hi, classR, ri), world);
  return out;
}

DeferralSystem make_system(const FiniteClass& classH, std::size_t h_index,
                           const FiniteClass& classR, std::size_t r_index) {
  return DeferralSystem{classH.member_fn(h_index), classR.member_fn(r_index)};
}

}  // namespace deferlab
