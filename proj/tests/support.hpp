#ifndef FAIRBANDIT_TESTS_SUPPORT_HPP
#define FAIRBANDIT_TESTS_SUPPORT_HPP

// Shared helpers for the unit suites and the acceptance runner.

#include <unistd.h>

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fairbandit/fairbandit.hpp"

namespace fbtest {

using namespace fairbandit;

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("fairbandit_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Exact expected absorption time of the matching dynamics from starts
/// uniform over each player's neighbour set, via t = (I - Q)^-1 1 on the
/// product chain. Independent of the Monte Carlo code path.
inline double analytic_absorption_mean(const BipartiteGraph& g) {
  const std::size_t n = g.players();
  std::vector<StrategyProfile> states{StrategyProfile{}};
  for (std::size_t p = 0; p < n; ++p) {
    std::vector<StrategyProfile> next;
    for (const auto& s : states)
      for (ArmIndex a : g.neighbors(p)) {
        auto t = s;
        t.push_back(a);
        next.push_back(t);
      }
    states = std::move(next);
  }
  std::map<StrategyProfile, std::size_t> transient;
  for (const auto& s : states)
    if (!is_collision_free(s, g.arms())) transient.emplace(s, transient.size());

  const auto k = static_cast<Eigen::Index>(transient.size());
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(k, k);
  for (const auto& [s, row] : transient) {
    const auto occ = arm_occupancy(s, g.arms());
    // Enumerate every joint redraw of the colliding players.
    std::vector<std::pair<StrategyProfile, double>> outcomes{{s, 1.0}};
    for (std::size_t p = 0; p < n; ++p) {
      if (occ[s[p]] < 2) continue;
      const auto& nb = g.neighbors(p);
      std::vector<std::pair<StrategyProfile, double>> next;
      for (const auto& [prof, w] : outcomes)
        for (ArmIndex a : nb) {
          auto t = prof;
          t[p] = a;
          next.emplace_back(t, w / static_cast<double>(nb.size()));
        }
      outcomes = std::move(next);
    }
    for (const auto& [prof, w] : outcomes) {
      auto it = transient.find(prof);
      if (it != transient.end()) q(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(it->second)) += w;
    }
  }
  Eigen::VectorXd t = Eigen::VectorXd::Zero(k);
  if (k > 0) {
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(k, k) - q;
    t = a.partialPivLu().solve(Eigen::VectorXd::Ones(k));
  }
  double mean = 0.0;
  for (const auto& s : states) {
    auto it = transient.find(s);
    if (it != transient.end()) mean += t(static_cast<Eigen::Index>(it->second));
  }
  return mean / static_cast<double>(states.size());
}

struct ConsensusTrial {
  StrategyProfile terminal;   // profile on the last matching turn
  std::vector<bool> success;  // S_k per agent
};

/// Plays real agents through epoch 1 up to the end of consensus on
/// `matrix`. Short explore/match lengths so terminal profiles vary widely.
inline ConsensusTrial run_consensus_trial(const RewardMatrix& matrix, double c2, std::uint64_t seed) {
  AgentConfig cfg;
  cfg.arms = matrix.arms();
  cfg.c1 = 1.0;
  cfg.c2 = c2;
  std::vector<Agent> agents;
  for (std::size_t n = 0; n < matrix.players(); ++n) agents.emplace_back(cfg, derive_seed(seed, n));
  Environment env(matrix, NoiseModel{}, derive_seed(seed, "env"));

  ConsensusTrial trial;
  StrategyProfile profile(matrix.players());
  std::vector<TurnOutcome> out;
  for (std::uint64_t t = 1; agents.front().phase() != Phase::Exploit; ++t) {
    const Phase before = agents.front().phase();
    for (std::size_t n = 0; n < agents.size(); ++n) profile[n] = agents[n].act(t);
    if (before == Phase::Match) trial.terminal = profile;
    env.step(profile, out);
    for (std::size_t n = 0; n < agents.size(); ++n) agents[n].observe(out[n]);
  }
  for (const auto& a : agents) trial.success.push_back(a.history().back().success);
  return trial;
}

/// Random instance with N <= max_players and N <= M <= N + 3.
inline RewardMatrix random_instance(Rng& rng, std::size_t max_players) {
  const std::size_t n = 1 + uniform_index(rng, max_players);
  const std::size_t m = n + uniform_index(rng, 4);
  std::vector<double> mu(n * m);
  for (auto& x : mu) x = 0.05 + 0.9 * uniform01(rng);
  return RewardMatrix(n, m, std::move(mu));
}

/// Actions and outcomes of one player over a game.
struct Transcript {
  std::vector<ArmIndex> actions;
  std::vector<TurnOutcome> outcomes;
};

/// Plays `turns` turns of N fresh agents on `matrix`; agent 0 gets `seed0`.
inline Transcript record_player0(const RewardMatrix& matrix, const AgentConfig& base,
                                 std::uint64_t seed0, std::uint64_t other_seed, std::uint64_t turns) {
  AgentConfig cfg = base;
  cfg.arms = matrix.arms();
  std::vector<Agent> agents;
  agents.emplace_back(cfg, seed0);
  for (std::size_t n = 1; n < matrix.players(); ++n) agents.emplace_back(cfg, derive_seed(other_seed, n));
  Environment env(matrix, NoiseModel{}, derive_seed(other_seed, "env"));
  Transcript tr;
  StrategyProfile profile(matrix.players());
  std::vector<TurnOutcome> out;
  for (std::uint64_t t = 1; t <= turns; ++t) {
    for (std::size_t n = 0; n < agents.size(); ++n) profile[n] = agents[n].act(t);
    env.step(profile, out);
    for (std::size_t n = 0; n < agents.size(); ++n) agents[n].observe(out[n]);
    tr.actions.push_back(profile[0]);
    tr.outcomes.push_back(out[0]);
  }
  return tr;
}

/// Feeds a recorded outcome stream to a fresh agent; returns its actions.
inline std::vector<ArmIndex> replay(const AgentConfig& cfg, std::uint64_t seed,
                                    const std::vector<TurnOutcome>& outcomes) {
  Agent a(cfg, seed);
  std::vector<ArmIndex> acts;
  for (std::uint64_t t = 1; t <= outcomes.size(); ++t) {
    acts.push_back(a.act(t));
    a.observe(outcomes[t - 1]);
  }
  return acts;
}

}  // namespace fbtest

#endif  // FAIRBANDIT_TESTS_SUPPORT_HPP
