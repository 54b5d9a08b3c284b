#ifndef FAIRBANDIT_AGENT_HPP
#define FAIRBANDIT_AGENT_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "fairbandit/environment.hpp"
#include "fairbandit/rng.hpp"

namespace fairbandit {

/// Per-player parameters. Defaults are the tuned experimental values; the
/// analysed algorithm corresponds to ci_scale = epsilon_scale = 1 and
/// warm_start = false.
struct AgentConfig {
  std::size_t arms = 1;
  double c1 = 1000.0;  // exploration length factor
  double c2 = 2000.0;  // matching length factor
  double c3 = 4000.0;  // exploitation length factor
  double ci_scale = 0.01;
  double epsilon_scale = 0.2;
  bool warm_start = true;
  // When false, a reward of exactly 0 is read as a collision.
  bool use_collision_bit = true;

  void validate() const {
    if (arms < 1) throw std::invalid_argument("agent needs at least one arm");
    if (!(c1 >= 1.0 && c2 >= 1.0 && c3 >= 1.0)) {
      throw std::invalid_argument("phase constants c1, c2, c3 must be >= 1");
    }
    if (!(ci_scale > 0.0)) throw std::invalid_argument("ci_scale must be > 0");
    if (!(epsilon_scale > 0.0)) throw std::invalid_argument("epsilon_scale must be > 0");
  }
};

enum class Phase { Explore, Match, Consensus, Exploit };

constexpr std::string_view to_string(Phase p) noexcept {
  switch (p) {
    case Phase::Explore: return "explore";
    case Phase::Match: return "match";
    case Phase::Consensus: return "consensus";
    case Phase::Exploit: return "exploit";
  }
  return "?";
}

struct PhaseLengths {
  std::uint64_t explore = 0;
  std::uint64_t match = 0;
  std::uint64_t consensus = 0;
  std::uint64_t exploit = 0;

  std::uint64_t total() const noexcept { return explore + match + consensus + exploit; }
  std::uint64_t operator[](Phase p) const noexcept {
    switch (p) {
      case Phase::Explore: return explore;
      case Phase::Match: return match;
      case Phase::Consensus: return consensus;
      case Phase::Exploit: return exploit;
    }
    return 0;
  }
};

/// Phase lengths of epoch k >= 1 (natural log):
/// ceil(c1 ln(k+1)), ceil(c2 ln(k+1)), M, ceil(c3 (4/3)^k).
inline PhaseLengths phase_lengths(std::uint64_t k, const AgentConfig& cfg) {
  if (k < 1) throw std::invalid_argument("epochs are numbered from 1");
  const double lk = std::log(static_cast<double>(k) + 1.0);
  return PhaseLengths{
      static_cast<std::uint64_t>(std::ceil(cfg.c1 * lk)),
      static_cast<std::uint64_t>(std::ceil(cfg.c2 * lk)),
      static_cast<std::uint64_t>(cfg.arms),
      static_cast<std::uint64_t>(std::ceil(cfg.c3 * std::pow(4.0 / 3.0, static_cast<double>(k)))),
  };
}

/// Turns needed to complete epochs 1..epochs.
inline std::uint64_t turns_for_epochs(std::uint64_t epochs, const AgentConfig& cfg) {
  std::uint64_t t = 0;
  for (std::uint64_t k = 1; k <= epochs; ++k) t += phase_lengths(k, cfg).total();
  return t;
}

/// Confidence radius ci_scale * sqrt(M / ln V); infinite below three clean visits.
inline double confidence_radius(std::uint64_t visits, std::size_t arms, double ci_scale) {
  if (visits < 3) return std::numeric_limits<double>::infinity();
  return ci_scale * std::sqrt(static_cast<double>(arms) / std::log(static_cast<double>(visits)));
}

/// Arms whose estimate clears gamma up to the confidence radius. Never empty:
/// falls back to every arm.
inline std::vector<ArmIndex> eligible_arms(std::span<const std::uint64_t> visits,
                                           std::span<const double> mean, double gamma,
                                           double ci_scale) {
  const std::size_t m = visits.size();
  std::vector<ArmIndex> out;
  for (std::size_t i = 0; i < m; ++i) {
    const double c = confidence_radius(visits[i], m, ci_scale);
    if (std::isinf(c) || mean[i] >= gamma - c) out.push_back(i);
  }
  if (out.empty()) {
    out.resize(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = i;
  }
  return out;
}

/// Search level gamma with its periodic reset schedule. A reset zeroes gamma,
/// sets the next expiry to ceil(k/3) and shrinks the step to
/// epsilon_scale / (1 + ln k); between resets the step is unchanged.
struct SearchLevel {
  double gamma = 0.0;
  double epsilon = 1.0;
  std::uint64_t reset_counter = 0;
  std::uint64_t reset_expiry = 1;

  /// Runs at the start of epoch k's matching phase. Returns whether a reset fired.
  bool begin_matching(std::uint64_t k, double epsilon_scale) {
    ++reset_counter;
    if (reset_counter != reset_expiry) return false;
    gamma = 0.0;
    reset_counter = 0;
    reset_expiry = (k + 2) / 3;
    epsilon = epsilon_scale / (1.0 + std::log(static_cast<double>(k)));
    return true;
  }

  /// gamma_{k+1} = gamma_k + epsilon_k when a matching was confirmed.
  void settle(bool success) {
    if (success) gamma += epsilon;
  }
};

/// What a player remembers about one finished matching + consensus round.
struct EpochRecord {
  std::uint64_t epoch = 0;
  double gamma = 0.0;
  bool success = false;  // S_k
  ArmIndex arm = 0;      // arm held at the end of the matching phase

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

/// Largest epoch in [ceil(k/2), k] maximising gamma * S. `history[j]` must
/// describe epoch j + 1.
inline std::uint64_t select_exploit_epoch(std::span<const EpochRecord> history, std::uint64_t k) {
  if (k < 1 || history.size() < k) {
    throw std::invalid_argument("history does not cover the exploitation window");
  }
  const std::uint64_t lo = (k + 1) / 2;
  double best = -1.0;
  std::uint64_t best_epoch = k;
  for (std::uint64_t l = lo; l <= k; ++l) {
    const auto& r = history[l - 1];
    const double score = r.success ? r.gamma : 0.0;
    if (score >= best) {
      best = score;
      best_epoch = l;
    }
  }
  return best_epoch;
}

/// One player running the four-phase fair-bandit protocol. It sees only the
/// turn clock and its own outcomes; N never enters its state.
///
/// Usage per turn: `arm = act(t)`, then `observe(outcome)`.
class Agent {
 public:
  Agent(AgentConfig cfg, std::uint64_t seed)
      : cfg_(cfg),
        rng_(seed),
        visits_(cfg.arms, 0),
        sums_(cfg.arms, 0.0),
        mean_(cfg.arms, 0.0) {
    level_.epsilon = cfg.epsilon_scale;
    cfg_.validate();
    lengths_ = phase_lengths(1, cfg_);
    clock_ = lengths_.explore;
  }

  /// Arm for turn `turn` (1-based, consecutive).
  ArmIndex act(std::uint64_t turn) {
    if (awaiting_observe_) throw std::logic_error("act called twice without observe");
    if (turn != turn_ + 1) throw std::logic_error("agent turn clock out of step");
    awaiting_observe_ = true;
    switch (phase_) {
      case Phase::Explore: played_ = uniform_index(rng_, cfg_.arms); break;
      case Phase::Match: played_ = current_; break;
      case Phase::Consensus:
        played_ = matched_clean_ ? matched_arm_ : static_cast<ArmIndex>(phase_turn_);
        break;
      case Phase::Exploit: played_ = exploit_arm_; break;
    }
    return played_;
  }

  void observe(const TurnOutcome& outcome) {
    if (!awaiting_observe_) throw std::logic_error("observe called without a preceding act");
    awaiting_observe_ = false;
    ++turn_;
    const bool collided = cfg_.use_collision_bit ? outcome.collided : outcome.reward == 0.0;

    switch (phase_) {
      case Phase::Explore:
        if (!collided) {
          ++visits_[played_];
          sums_[played_] += outcome.reward;
          mean_[played_] = sums_[played_] / static_cast<double>(visits_[played_]);
        }
        break;
      case Phase::Match:
        // Rewards are ignored here; only the collision bit drives the dynamics.
        last_collided_ = collided;
        if (collided) current_ = draw_eligible();
        break;
      case Phase::Consensus:
        if (collided) consensus_collision_ = true;
        break;
      case Phase::Exploit:
        break;
    }

    ++phase_turn_;
    if (--clock_ == 0) advance_phase();
  }

  const AgentConfig& config() const noexcept { return cfg_; }
  Phase phase() const noexcept { return phase_; }
  std::uint64_t epoch() const noexcept { return epoch_; }
  std::uint64_t turns_played() const noexcept { return turn_; }
  std::uint64_t phase_turns_remaining() const noexcept { return clock_; }
  double gamma() const noexcept { return level_.gamma; }
  double epsilon() const noexcept { return level_.epsilon; }
  const SearchLevel& search_level() const noexcept { return level_; }
  std::span<const std::uint64_t> visits() const noexcept { return visits_; }
  std::span<const double> reward_sums() const noexcept { return sums_; }
  std::span<const double> estimates() const noexcept { return mean_; }
  std::span<const EpochRecord> history() const noexcept { return history_; }
  const std::vector<ArmIndex>& eligible() const noexcept { return eligible_; }
  bool has_exploit_arm() const noexcept { return has_exploit_; }
  ArmIndex exploit_arm() const noexcept { return exploit_arm_; }
  std::uint64_t exploit_epoch() const noexcept { return exploit_epoch_; }
  bool consensus_collision() const noexcept { return consensus_collision_; }
  bool matching_ended_clean() const noexcept { return matched_clean_; }

  /// E = {i : mean_i >= gamma - C_i} for the current estimates and gamma.
  std::vector<ArmIndex> eligible_set() const {
    return eligible_arms(visits_, mean_, level_.gamma, cfg_.ci_scale);
  }

 private:
  void consensus_end_update() {
    const bool success = !consensus_collision_;
    history_.push_back(EpochRecord{epoch_, level_.gamma, success, matched_arm_});
    level_.settle(success);
  }

  ArmIndex draw_eligible() { return eligible_[uniform_index(rng_, eligible_.size())]; }

  void enter(Phase p) {
    phase_ = p;
    phase_turn_ = 0;
    clock_ = lengths_[p];
  }

  void advance_phase() {
    switch (phase_) {
      case Phase::Explore: {
        level_.begin_matching(epoch_, cfg_.epsilon_scale);
        eligible_ = eligible_set();
        const bool warm = cfg_.warm_start && has_exploit_ &&
                          std::find(eligible_.begin(), eligible_.end(), exploit_arm_) !=
                              eligible_.end();
        current_ = warm ? exploit_arm_ : draw_eligible();
        last_collided_ = false;
        enter(Phase::Match);
        break;
      }
      case Phase::Match:
        matched_arm_ = played_;
        matched_clean_ = !last_collided_;
        consensus_collision_ = false;
        enter(Phase::Consensus);
        break;
      case Phase::Consensus:
        consensus_end_update();
        exploit_epoch_ = select_exploit_epoch(history_, epoch_);
        exploit_arm_ = history_[exploit_epoch_ - 1].arm;
        has_exploit_ = true;
        enter(Phase::Exploit);
        break;
      case Phase::Exploit:
        ++epoch_;
        lengths_ = phase_lengths(epoch_, cfg_);
        enter(Phase::Explore);
        break;
    }
  }

  AgentConfig cfg_;
  Rng rng_;

  std::vector<std::uint64_t> visits_;
  std::vector<double> sums_;
  std::vector<double> mean_;

  SearchLevel level_;

  std::vector<EpochRecord> history_;
  std::vector<ArmIndex> eligible_;

  Phase phase_ = Phase::Explore;
  PhaseLengths lengths_;
  std::uint64_t epoch_ = 1;
  std::uint64_t clock_ = 0;
  std::uint64_t phase_turn_ = 0;
  std::uint64_t turn_ = 0;

  bool awaiting_observe_ = false;
  ArmIndex played_ = 0;
  ArmIndex current_ = 0;
  bool last_collided_ = false;
  ArmIndex matched_arm_ = 0;
  bool matched_clean_ = false;
  bool consensus_collision_ = false;
  bool has_exploit_ = false;
  ArmIndex exploit_arm_ = 0;
  std::uint64_t exploit_epoch_ = 0;
};

}  // namespace fairbandit

#endif  // FAIRBANDIT_AGENT_HPP
