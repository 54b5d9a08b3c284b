#ifndef FAIRBANDIT_ENVIRONMENT_HPP
#define FAIRBANDIT_ENVIRONMENT_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairbandit/reward_matrix.hpp"
#include "fairbandit/rng.hpp"

namespace fairbandit {

/// Arm indices are zero-based throughout the library; reports print them one-based.
using ArmIndex = std::size_t;

/// One arm per player for a single turn.
using StrategyProfile = std::vector<ArmIndex>;

struct NoiseModel {
  enum class Kind { UniformAdditive };
  Kind kind = Kind::UniformAdditive;
  double half_width = 0.05;
};

struct TurnOutcome {
  double reward = 0.0;  // exactly 0 on collision
  bool collided = false;

  friend bool operator==(const TurnOutcome&, const TurnOutcome&) = default;
};

inline void check_profile(std::span<const ArmIndex> profile, std::size_t arms) {
  for (ArmIndex a : profile) {
    if (a >= arms) {
      throw std::out_of_range("arm index " + std::to_string(a) + " out of range for " +
                              std::to_string(arms) + " arms");
    }
  }
}

/// Number of players on each arm.
inline std::vector<std::size_t> arm_occupancy(std::span<const ArmIndex> profile, std::size_t arms) {
  check_profile(profile, arms);
  std::vector<std::size_t> count(arms, 0);
  for (ArmIndex a : profile) ++count[a];
  return count;
}

/// Entry i is 0 iff two or more players chose arm i. Unused arms count as collision-free.
inline std::vector<int> no_collision_indicator(std::span<const ArmIndex> profile, std::size_t arms) {
  const auto count = arm_occupancy(profile, arms);
  std::vector<int> eta(arms);
  std::transform(count.begin(), count.end(), eta.begin(),
                 [](std::size_t c) { return c > 1 ? 0 : 1; });
  return eta;
}

inline bool is_collision_free(std::span<const ArmIndex> profile, std::size_t arms) {
  const auto count = arm_occupancy(profile, arms);
  return std::none_of(count.begin(), count.end(), [](std::size_t c) { return c > 1; });
}

/// min over players of the expected utility mu(n, a_n) * eta_{a_n}(a).
inline double expected_min_utility(const RewardMatrix& matrix, std::span<const ArmIndex> profile) {
  if (profile.size() != matrix.players()) {
    throw std::invalid_argument("profile length does not match the number of players");
  }
  const auto count = arm_occupancy(profile, matrix.arms());
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < profile.size(); ++n) {
    const double u = count[profile[n]] > 1 ? 0.0 : matrix(n, profile[n]);
    lowest = std::min(lowest, u);
  }
  return lowest;
}

/// gamma_star minus the worst-off player's expected utility under the profile.
inline double instantaneous_regret(const RewardMatrix& matrix, double gamma_star,
                                   std::span<const ArmIndex> profile) {
  return gamma_star - expected_min_utility(matrix, profile);
}

/// Ground truth of the game plus its reward noise stream. Single-threaded;
/// one instance belongs to exactly one run.
class Environment {
 public:
  Environment(RewardMatrix matrix, NoiseModel noise, std::uint64_t seed)
      : matrix_(std::move(matrix)), noise_(noise), rng_(seed), count_(matrix_.arms(), 0) {
    if (!(noise_.half_width >= 0.0)) throw std::invalid_argument("noise half-width must be >= 0");
  }

  const RewardMatrix& matrix() const noexcept { return matrix_; }
  const NoiseModel& noise() const noexcept { return noise_; }

  /// Plays one turn. Every player consumes one noise draw, collided or not,
  /// so the stream position depends only on the number of turns played.
  void step(std::span<const ArmIndex> profile, std::vector<TurnOutcome>& out) {
    if (profile.size() != matrix_.players()) {
      throw std::invalid_argument("profile has " + std::to_string(profile.size()) +
                                  " entries, expected " + std::to_string(matrix_.players()));
    }
    check_profile(profile, matrix_.arms());
    std::fill(count_.begin(), count_.end(), 0);
    for (ArmIndex a : profile) ++count_[a];

    const double h = noise_.half_width;
    out.resize(profile.size());
    for (std::size_t n = 0; n < profile.size(); ++n) {
      const double draw = h * (2.0 * uniform01(rng_) - 1.0);
      const bool collided = count_[profile[n]] > 1;
      out[n].collided = collided;
      out[n].reward = collided ? 0.0 : matrix_(n, profile[n]) + draw;
    }
  }

  std::vector<TurnOutcome> step(std::span<const ArmIndex> profile) {
    std::vector<TurnOutcome> out;
    step(profile, out);
    return out;
  }

 private:
  RewardMatrix matrix_;
  NoiseModel noise_;
  Rng rng_;
  std::vector<std::size_t> count_;
};

}  // namespace fairbandit

#endif  // FAIRBANDIT_ENVIRONMENT_HPP
