#ifndef FAIRBANDIT_HARNESS_HPP
#define FAIRBANDIT_HARNESS_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fairbandit/agent.hpp"
#include "fairbandit/environment.hpp"
#include "fairbandit/oracle.hpp"
#include "fairbandit/reward_matrix.hpp"
#include "fairbandit/rng.hpp"

namespace fairbandit {

struct ExperimentConfig {
  double noise = 0.05;
  AgentConfig agent;  // `arms` is taken from the matrix
  std::uint64_t horizon = 200'000;
  std::size_t runs = 1;
  std::uint64_t seed = 1;
  std::uint64_t stride = 1000;
  std::size_t threads = 0;  // 0: one per hardware thread

  void validate() const {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (runs < 1) throw std::invalid_argument("runs must be >= 1");
    if (stride < 1) throw std::invalid_argument("stride must be >= 1");
    if (!(noise >= 0.0)) throw std::invalid_argument("noise half-width must be >= 0");
  }
};

/// Seed of run r within a batch.
inline std::uint64_t run_seed(std::uint64_t master, std::size_t run) { return derive_seed(master, run); }
/// Seed of player n within a run.
inline std::uint64_t agent_seed(std::uint64_t run, std::size_t player) { return derive_seed(run, player); }
/// Seed of the environment's noise stream within a run.
inline std::uint64_t environment_seed(std::uint64_t run) { return derive_seed(run, "env"); }

struct Checkpoint {
  std::uint64_t turn = 0;
  double regret = 0.0;  // cumulative through `turn`
  std::uint64_t epoch = 0;          // 0 for players without epochs
  std::optional<Phase> phase;       // phase the turn was played in

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

struct EpochDiagnostics {
  std::uint64_t epoch = 0;
  double gamma = 0.0;
  bool success = false;
  std::uint64_t exploit_epoch = 0;
  StrategyProfile exploit_profile;
  bool exploit_optimal = false;  // exploit_profile is a gamma*-matching
  std::uint64_t exploit_start = 0;  // first exploitation turn
  std::uint64_t end_turn = 0;       // last turn of the epoch; 0 if cut off by the horizon
  double regret_at_end = 0.0;

  friend bool operator==(const EpochDiagnostics&, const EpochDiagnostics&) = default;
};

struct RunTrace {
  std::uint64_t seed = 0;
  std::uint64_t horizon = 0;
  double gamma_star = 0.0;
  std::vector<Checkpoint> checkpoints;
  std::vector<EpochDiagnostics> epochs;
  std::uint64_t epochs_started = 0;
  double final_regret = 0.0;

  friend bool operator==(const RunTrace&, const RunTrace&) = default;
};

/// First epoch from which every recorded exploitation phase plays a
/// gamma*-matching; empty if the last recorded one does not.
inline std::optional<std::uint64_t> convergence_epoch(const RunTrace& trace) {
  std::optional<std::uint64_t> from;
  for (auto it = trace.epochs.rbegin(); it != trace.epochs.rend(); ++it) {
    if (!it->exploit_optimal) break;
    from = it->epoch;
  }
  return from;
}

/// Upper bound on the number of epochs that can start within `horizon` turns.
inline double epoch_count_bound(std::uint64_t horizon, double c3) {
  return std::log(static_cast<double>(horizon) / (3.0 * c3) + 4.0 / 3.0) / std::log(4.0 / 3.0);
}

template <class P>
concept Player = requires(P p, std::uint64_t turn, const TurnOutcome& o) {
  { p.act(turn) } -> std::convertible_to<ArmIndex>;
  p.observe(o);
};

template <class P>
concept EpochPlayer = Player<P> && requires(const P& p) {
  { p.phase() } -> std::same_as<Phase>;
  { p.epoch() } -> std::convertible_to<std::uint64_t>;
  { p.gamma() } -> std::convertible_to<double>;
  { p.exploit_arm() } -> std::convertible_to<ArmIndex>;
  { p.exploit_epoch() } -> std::convertible_to<std::uint64_t>;
  { p.config().c3 } -> std::convertible_to<double>;
  p.history();
};

namespace detail {

inline double min_utility(const RewardMatrix& matrix, const StrategyProfile& profile,
                          std::vector<std::size_t>& count) {
  std::fill(count.begin(), count.end(), 0);
  for (ArmIndex a : profile) ++count[a];
  double low = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < profile.size(); ++n)
    low = std::min(low, count[profile[n]] > 1 ? 0.0 : matrix(n, profile[n]));
  return low;
}

template <EpochPlayer P>
void check_lockstep(const std::vector<P>& players) {
  const auto& lead = players.front();
  for (const auto& p : players) {
    if (p.phase() != lead.phase() || p.epoch() != lead.epoch()) {
      throw std::logic_error("players lost lockstep");
    }
  }
}

}  // namespace detail

/// Plays `horizon` turns of `players` against `env`, accumulating regret
/// gamma* - min_n E[utility] on the realised profile. Checkpoints every
/// `stride` turns, at each epoch boundary, and at the horizon.
template <Player P>
RunTrace simulate(Environment& env, std::vector<P>& players, double gamma_star,
                  std::uint64_t horizon, std::uint64_t stride) {
  const RewardMatrix& matrix = env.matrix();
  if (players.size() != matrix.players()) {
    throw std::invalid_argument("need exactly one player per matrix row");
  }
  RunTrace trace;
  trace.horizon = horizon;
  trace.gamma_star = gamma_star;

  StrategyProfile profile(players.size());
  std::vector<TurnOutcome> outcomes;
  std::vector<std::size_t> count(matrix.arms());
  double regret = 0.0;

  for (std::uint64_t t = 1; t <= horizon; ++t) {
    for (std::size_t n = 0; n < players.size(); ++n) profile[n] = players[n].act(t);

    std::uint64_t epoch = 0;
    std::optional<Phase> phase;
    if constexpr (EpochPlayer<P>) {
      epoch = players.front().epoch();
      phase = players.front().phase();
      trace.epochs_started = std::max(trace.epochs_started, epoch);
    }

    env.step(profile, outcomes);
    for (std::size_t n = 0; n < players.size(); ++n) players[n].observe(outcomes[n]);
    regret += gamma_star - detail::min_utility(matrix, profile, count);

    bool boundary = false;
    if constexpr (EpochPlayer<P>) {
      const Phase now = players.front().phase();
      if (now != *phase) detail::check_lockstep(players);
      if (*phase == Phase::Consensus && now == Phase::Exploit) {
        const auto& lead = players.front();
        const EpochRecord& rec = lead.history().back();
        EpochDiagnostics d;
        d.epoch = rec.epoch;
        d.gamma = rec.gamma;
        d.success = rec.success;
        d.exploit_epoch = lead.exploit_epoch();
        d.exploit_start = t + 1;
        d.exploit_profile.reserve(players.size());
        for (const auto& p : players) {
          const EpochRecord& mine = p.history().back();
          if (mine.success != rec.success || mine.gamma != rec.gamma ||
              p.exploit_epoch() != d.exploit_epoch) {
            throw std::logic_error("players disagree after consensus");
          }
          d.exploit_profile.push_back(p.exploit_arm());
        }
        d.exploit_optimal = is_gamma_star_matching(matrix, d.exploit_profile, gamma_star);
        trace.epochs.push_back(std::move(d));
      } else if (*phase == Phase::Exploit && now == Phase::Explore) {
        boundary = true;
        if (!trace.epochs.empty() && trace.epochs.back().epoch == epoch) {
          trace.epochs.back().end_turn = t;
          trace.epochs.back().regret_at_end = regret;
        }
      }
    }

    if (boundary || t % stride == 0 || t == horizon) {
      trace.checkpoints.push_back(Checkpoint{t, regret, epoch, phase});
    }
  }
  trace.final_regret = regret;

  if constexpr (EpochPlayer<P>) {
    const double bound = epoch_count_bound(horizon, players.front().config().c3);
    if (static_cast<double>(trace.epochs_started) > bound + 1e-9) {
      throw std::logic_error("epoch count exceeds the schedule bound");
    }
  }
  return trace;
}

/// One full game of fair-bandit agents on `matrix`.
inline RunTrace run_single(const RewardMatrix& matrix, double gamma_star,
                           const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  AgentConfig ac = cfg.agent;
  ac.arms = matrix.arms();
  ac.validate();
  std::vector<Agent> agents;
  agents.reserve(matrix.players());
  for (std::size_t n = 0; n < matrix.players(); ++n) agents.emplace_back(ac, agent_seed(seed, n));
  Environment env(matrix, NoiseModel{NoiseModel::Kind::UniformAdditive, cfg.noise},
                  environment_seed(seed));
  RunTrace trace = simulate(env, agents, gamma_star, cfg.horizon, cfg.stride);
  trace.seed = seed;
  return trace;
}

inline RunTrace run_single(const RewardMatrix& matrix, const ExperimentConfig& cfg,
                           std::uint64_t seed) {
  return run_single(matrix, gamma_star(matrix).value, cfg, seed);
}

struct BatchSummary {
  std::size_t runs = 0;
  std::vector<std::uint64_t> turns;
  std::vector<double> mean;
  std::vector<double> stddev;  // population standard deviation across runs
  std::vector<std::optional<std::uint64_t>> convergence;  // per run
};

/// Per-checkpoint mean and standard deviation. Every trace must share the
/// same checkpoint turns; the reduction runs in trace order.
inline BatchSummary summarize(const std::vector<RunTrace>& traces) {
  if (traces.empty()) throw std::invalid_argument("cannot summarise an empty batch");
  BatchSummary s;
  s.runs = traces.size();
  const auto& first = traces.front().checkpoints;
  for (const auto& tr : traces) {
    if (tr.checkpoints.size() != first.size()) {
      throw std::logic_error("runs disagree on checkpoint schedule");
    }
    for (std::size_t c = 0; c < first.size(); ++c) {
      if (tr.checkpoints[c].turn != first[c].turn) {
        throw std::logic_error("runs disagree on checkpoint schedule");
      }
    }
    s.convergence.push_back(convergence_epoch(tr));
  }
  const double runs = static_cast<double>(traces.size());
  for (std::size_t c = 0; c < first.size(); ++c) {
    double sum = 0.0;
    for (const auto& tr : traces) sum += tr.checkpoints[c].regret;
    const double mean = sum / runs;
    double ss = 0.0;
    for (const auto& tr : traces) {
      const double d = tr.checkpoints[c].regret - mean;
      ss += d * d;
    }
    s.turns.push_back(first[c].turn);
    s.mean.push_back(mean);
    s.stddev.push_back(std::sqrt(ss / runs));
  }
  return s;
}

struct BatchResult {
  BatchSummary summary;
  std::vector<RunTrace> traces;
};

/// `cfg.runs` independent games with seeds run_seed(cfg.seed, r). Runs may
/// execute concurrently; results do not depend on scheduling. Any failing
/// run aborts the whole batch.
inline BatchResult run_batch(const RewardMatrix& matrix, const ExperimentConfig& cfg) {
  cfg.validate();
  const double gstar = gamma_star(matrix).value;
  std::vector<RunTrace> traces(cfg.runs);
  std::vector<std::exception_ptr> errors(cfg.runs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < cfg.runs; r = next++) {
      try {
        traces[r] = run_single(matrix, gstar, cfg, run_seed(cfg.seed, r));
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  std::size_t threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, cfg.runs);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  BatchResult out;
  out.summary = summarize(traces);
  out.traces = std::move(traces);
  return out;
}

}  // namespace fairbandit

#endif  // FAIRBANDIT_HARNESS_HPP
