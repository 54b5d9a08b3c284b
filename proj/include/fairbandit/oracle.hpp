#ifndef FAIRBANDIT_ORACLE_HPP
#define FAIRBANDIT_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairbandit/environment.hpp"
#include "fairbandit/reward_matrix.hpp"
#include "fairbandit/rng.hpp"

namespace fairbandit {

/// Players on the left, arms on the right.
class BipartiteGraph {
 public:
  BipartiteGraph(std::size_t players, std::size_t arms) : arms_(arms), adj_(players) {}

  void add_edge(std::size_t player, ArmIndex arm) {
    if (player >= adj_.size() || arm >= arms_) throw std::out_of_range("edge endpoint out of range");
    auto& nbrs = adj_[player];
    auto pos = std::lower_bound(nbrs.begin(), nbrs.end(), arm);
    if (pos == nbrs.end() || *pos != arm) nbrs.insert(pos, arm);
  }

  std::size_t players() const noexcept { return adj_.size(); }
  std::size_t arms() const noexcept { return arms_; }
  const std::vector<ArmIndex>& neighbors(std::size_t player) const { return adj_[player]; }

  bool has_edge(std::size_t player, ArmIndex arm) const {
    const auto& nbrs = adj_[player];
    return std::binary_search(nbrs.begin(), nbrs.end(), arm);
  }

 private:
  std::size_t arms_;
  std::vector<std::vector<ArmIndex>> adj_;
};

/// Edge (n, i) iff mu(n, i) >= threshold.
inline BipartiteGraph threshold_graph(const RewardMatrix& matrix, double threshold) {
  BipartiteGraph g(matrix.players(), matrix.arms());
  for (std::size_t n = 0; n < matrix.players(); ++n)
    for (std::size_t i = 0; i < matrix.arms(); ++i)
      if (matrix(n, i) >= threshold) g.add_edge(n, i);
  return g;
}

struct BipartiteMatching {
  std::size_t size = 0;
  std::vector<std::optional<ArmIndex>> arm_of;  // per player
};

namespace detail {

inline bool augment(const BipartiteGraph& g, std::size_t player, std::vector<char>& seen,
                    std::vector<std::optional<std::size_t>>& owner) {
  for (ArmIndex arm : g.neighbors(player)) {
    if (seen[arm]) continue;
    seen[arm] = 1;
    if (!owner[arm] || augment(g, *owner[arm], seen, owner)) {
      owner[arm] = player;
      return true;
    }
  }
  return false;
}

}  // namespace detail

/// Maximum-cardinality matching by repeated augmenting paths.
inline BipartiteMatching max_bipartite_matching(const BipartiteGraph& g) {
  std::vector<std::optional<std::size_t>> owner(g.arms());
  std::vector<char> seen(g.arms());
  BipartiteMatching result;
  for (std::size_t n = 0; n < g.players(); ++n) {
    std::fill(seen.begin(), seen.end(), 0);
    if (detail::augment(g, n, seen, owner)) ++result.size;
  }
  result.arm_of.assign(g.players(), std::nullopt);
  for (ArmIndex a = 0; a < g.arms(); ++a)
    if (owner[a]) result.arm_of[*owner[a]] = a;
  return result;
}

inline bool has_perfect_matching(const BipartiteGraph& g) {
  return max_bipartite_matching(g).size == g.players();
}

struct MatchingResult {
  StrategyProfile assignment;
  double value = 0.0;
};

/// Smallest expected reward in an injective assignment.
inline double bottleneck_value(const RewardMatrix& matrix, const StrategyProfile& assignment) {
  double v = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < assignment.size(); ++n) v = std::min(v, matrix(n, assignment[n]));
  return v;
}

/// Distinct entries in ascending order.
inline std::vector<double> distinct_entries(const RewardMatrix& matrix) {
  std::vector<double> v = matrix.data();
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

/// Max-min (bottleneck) assignment: the largest entry whose threshold graph
/// still has a perfect matching, found by binary search over the entries.
inline MatchingResult gamma_star(const RewardMatrix& matrix) {
  const auto levels = distinct_entries(matrix);
  // levels[lo] is feasible: the smallest entry gives the complete graph and M >= N.
  std::size_t lo = 0, hi = levels.size();
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (has_perfect_matching(threshold_graph(matrix, levels[mid]))) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const auto m = max_bipartite_matching(threshold_graph(matrix, levels[lo]));
  MatchingResult r;
  r.assignment.reserve(matrix.players());
  for (const auto& a : m.arm_of) r.assignment.push_back(*a);
  r.value = bottleneck_value(matrix, r.assignment);
  return r;
}

/// True iff the profile is injective and every player gets at least gamma_star.
inline bool is_gamma_star_matching(const RewardMatrix& matrix, const StrategyProfile& profile,
                                   double gamma_star, double tol = 1e-12) {
  return is_collision_free(profile, matrix.arms()) &&
         expected_min_utility(matrix, profile) >= gamma_star - tol;
}

struct MatchingHistogram {
  std::map<double, std::uint64_t> count;  // bottleneck value -> assignments
  std::uint64_t total = 0;
};

/// Thrown when exhaustive enumeration exceeds the configured limit.
class EnumerationTooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// M! / (M - N)!, saturating at `cap` + 1.
inline std::uint64_t injective_assignment_count(std::size_t players, std::size_t arms,
                                                std::uint64_t cap) {
  std::uint64_t c = 1;
  for (std::size_t j = 0; j < players; ++j) {
    const std::uint64_t f = arms - j;
    if (f > cap || c > cap / f) return cap + 1;
    c *= f;
  }
  return c;
}

inline constexpr std::uint64_t kEnumerationLimit = 100'000'000;

namespace detail {

struct HistogramWalk {
  std::size_t players;
  std::size_t arms;
  std::vector<std::size_t> bucket;  // matrix cell -> bucket index
  std::vector<std::uint64_t> hits;
  std::vector<char> used;

  void walk(std::size_t n, std::size_t low) {
    if (n == players) {
      ++hits[low];
      return;
    }
    const std::size_t* row = &bucket[n * arms];
    for (std::size_t a = 0; a < arms; ++a) {
      if (used[a]) continue;
      used[a] = 1;
      walk(n + 1, std::min(low, row[a]));
      used[a] = 0;
    }
  }
};

}  // namespace detail

/// Counts every injective player->arm assignment by its exact bottleneck
/// value. Entries closer than `tol` share a bucket.
inline MatchingHistogram matching_histogram(const RewardMatrix& matrix,
                                            std::uint64_t limit = kEnumerationLimit,
                                            double tol = 1e-12) {
  const auto total = injective_assignment_count(matrix.players(), matrix.arms(), limit);
  if (total > limit) {
    throw EnumerationTooLarge("matching enumeration exceeds " + std::to_string(limit) +
                              " assignments");
  }
  std::vector<double> reps;
  for (double v : distinct_entries(matrix))
    if (reps.empty() || v - reps.back() > tol) reps.push_back(v);

  detail::HistogramWalk w{matrix.players(), matrix.arms(), {}, {}, {}};
  w.bucket.resize(matrix.data().size());
  for (std::size_t c = 0; c < matrix.data().size(); ++c) {
    const double v = matrix.data()[c];
    auto it = std::lower_bound(reps.begin(), reps.end(), v - tol);
    w.bucket[c] = static_cast<std::size_t>(it - reps.begin());
  }
  w.hits.assign(reps.size(), 0);
  w.used.assign(matrix.arms(), 0);
  w.walk(0, reps.size() - 1);

  MatchingHistogram h;
  for (std::size_t b = 0; b < reps.size(); ++b) {
    if (w.hits[b] == 0) continue;
    h.count[reps[b]] = w.hits[b];
    h.total += w.hits[b];
  }
  return h;
}

struct MaxSumResult {
  StrategyProfile assignment;
  double sum = 0.0;
  double bottleneck = 0.0;
};

/// Assignment maximising the total expected reward (Hungarian method,
/// rectangular N <= M, O(N^2 M)).
inline MaxSumResult max_sum_matching(const RewardMatrix& matrix) {
  const std::size_t n = matrix.players(), m = matrix.arms();
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials; column 0 is the virtual root.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = -matrix(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  MaxSumResult r;
  r.assignment.assign(n, 0);
  for (std::size_t j = 1; j <= m; ++j)
    if (p[j] != 0) r.assignment[p[j] - 1] = j - 1;
  for (std::size_t i = 0; i < n; ++i) r.sum += matrix(i, r.assignment[i]);
  r.bottleneck = bottleneck_value(matrix, r.assignment);
  return r;
}

struct GapReport {
  double delta = 0.0;
};

/// min over players of the smallest gap between two of that player's arms.
inline GapReport minimal_gap(const RewardMatrix& matrix) {
  if (matrix.arms() < 2) throw std::invalid_argument("minimal gap needs at least two arms");
  double d = std::numeric_limits<double>::infinity();
  std::vector<double> row(matrix.arms());
  for (std::size_t n = 0; n < matrix.players(); ++n) {
    for (std::size_t i = 0; i < matrix.arms(); ++i) row[i] = matrix(n, i);
    std::sort(row.begin(), row.end());
    for (std::size_t i = 1; i < row.size(); ++i) d = std::min(d, row[i] - row[i - 1]);
  }
  return GapReport{d};
}

/// One step of the matching dynamics: players on a shared arm redraw
/// uniformly from their neighbours, everyone else stays. Returns false (and
/// leaves the profile untouched) when the profile is already collision-free.
inline bool matching_dynamics_step(const BipartiteGraph& g, StrategyProfile& profile, Rng& rng,
                                   std::vector<std::size_t>& occupancy) {
  occupancy.assign(g.arms(), 0);
  for (ArmIndex a : profile) ++occupancy[a];
  bool moved = false;
  for (std::size_t n = 0; n < profile.size(); ++n) {
    if (occupancy[profile[n]] > 1) {
      const auto& nbrs = g.neighbors(n);
      profile[n] = nbrs[uniform_index(rng, nbrs.size())];
      moved = true;
    }
  }
  return moved;
}

struct AbsorptionSummary {
  std::size_t trials = 0;
  double mean = 0.0;  // unabsorbed trials count as `cap`
  std::uint64_t max = 0;
  double fraction_absorbed = 0.0;
};

/// Monte Carlo absorption time of the matching dynamics from starts drawn
/// uniformly from each player's neighbour set.
inline AbsorptionSummary estimate_absorption_time(const BipartiteGraph& g, std::size_t trials,
                                                  std::uint64_t cap, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("need at least one trial");
  if (!has_perfect_matching(g)) {
    throw std::invalid_argument("graph has no perfect matching; the dynamics never absorb");
  }
  Rng rng(seed);
  StrategyProfile profile(g.players());
  std::vector<std::size_t> occupancy;
  AbsorptionSummary s;
  s.trials = trials;
  double total = 0.0;
  std::size_t absorbed = 0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    for (std::size_t n = 0; n < g.players(); ++n) {
      const auto& nbrs = g.neighbors(n);
      profile[n] = nbrs[uniform_index(rng, nbrs.size())];
    }
    std::uint64_t t = 0;
    while (t < cap && matching_dynamics_step(g, profile, rng, occupancy)) ++t;
    const bool done = is_collision_free(profile, g.arms());
    if (done) ++absorbed;
    total += static_cast<double>(t);
    s.max = std::max(s.max, t);
  }
  s.mean = total / static_cast<double>(trials);
  s.fraction_absorbed = static_cast<double>(absorbed) / static_cast<double>(trials);
  return s;
}

}  // namespace fairbandit

#endif  // FAIRBANDIT_ORACLE_HPP
