#include <gtest/gtest.h>

#include <set>

#include "support.hpp"

using namespace fairbandit;

namespace {

struct Scripted {
  StrategyProfile plan;
  std::size_t index = 0;
  ArmIndex act(std::uint64_t) const { return plan[index]; }
  void observe(const TurnOutcome&) {}
};

std::vector<Scripted> scripted(const StrategyProfile& p) {
  std::vector<Scripted> out;
  for (std::size_t n = 0; n < p.size(); ++n) out.push_back(Scripted{p, n});
  return out;
}

ExperimentConfig quick(std::uint64_t epochs) {
  ExperimentConfig cfg;
  cfg.agent.c1 = 100;
  cfg.agent.c2 = 200;
  cfg.agent.c3 = 400;
  cfg.agent.arms = 4;
  cfg.horizon = turns_for_epochs(epochs, cfg.agent);
  cfg.stride = 500;
  return cfg;
}

}  // namespace

static_assert(Player<Scripted>);
static_assert(!EpochPlayer<Scripted>);
static_assert(EpochPlayer<Agent>);

TEST(Simulate, OptimalScriptHasNoRegret) {
  Environment env(matrices::u1(), NoiseModel{NoiseModel::Kind::UniformAdditive, 0.0}, 1);
  auto players = scripted({0, 1, 2, 3});
  const auto tr = simulate(env, players, 0.5, 5000, 1000);
  ASSERT_EQ(tr.checkpoints.size(), 5u);
  for (const auto& c : tr.checkpoints) {
    EXPECT_EQ(c.regret, 0.0);
    EXPECT_FALSE(c.phase.has_value());
  }
}

TEST(Simulate, AllOnOneArm) {
  Environment env(matrices::u1(), NoiseModel{}, 1);
  auto players = scripted({0, 0, 0, 0});
  const auto tr = simulate(env, players, 0.5, 4321, 1000);
  EXPECT_EQ(tr.final_regret, 0.5 * 4321);
  EXPECT_EQ(tr.checkpoints.back().turn, 4321u);
}

TEST(Simulate, RejectsPlayerCountMismatch) {
  Environment env(matrices::u1(), NoiseModel{}, 1);
  auto players = scripted({0, 1, 2});
  EXPECT_THROW(simulate(env, players, 0.5, 10, 1), std::invalid_argument);
}

TEST(EpochCountBound, Values) {
  EXPECT_NEAR(epoch_count_bound(3 * 4000, 4000), std::log(7.0 / 3.0) / std::log(4.0 / 3.0), 1e-12);
  AgentConfig cfg;
  cfg.arms = 4;
  for (std::uint64_t k = 1; k <= 20; ++k) {
    EXPECT_LE(static_cast<double>(k), epoch_count_bound(turns_for_epochs(k, cfg), cfg.c3));
  }
}

TEST(RunSingle, TraceInvariants) {
  const auto u1 = matrices::u1();
  const auto cfg = quick(8);
  const auto tr = run_single(u1, cfg, 42);
  EXPECT_EQ(tr.seed, 42u);
  EXPECT_EQ(tr.gamma_star, 0.5);
  EXPECT_EQ(tr.epochs.size(), 8u);
  EXPECT_EQ(tr.epochs_started, 8u);
  double prev = 0;
  std::uint64_t prev_turn = 0;
  for (const auto& c : tr.checkpoints) {
    EXPECT_GT(c.turn, prev_turn);
    EXPECT_GE(c.regret, prev);
    EXPECT_LE(c.regret - prev, 0.5 * static_cast<double>(c.turn - prev_turn) + 1e-9);
    prev = c.regret;
    prev_turn = c.turn;
  }
  std::uint64_t end = 0;
  for (std::uint64_t k = 1; k <= 8; ++k) {
    const auto& e = tr.epochs[k - 1];
    EXPECT_EQ(e.epoch, k);
    end += phase_lengths(k, cfg.agent).total();
    EXPECT_EQ(e.end_turn, end);
    EXPECT_EQ(e.exploit_start, end - phase_lengths(k, cfg.agent).exploit + 1);
    EXPECT_EQ(e.exploit_optimal, is_gamma_star_matching(u1, e.exploit_profile, 0.5));
    EXPECT_GE(e.exploit_epoch, (k + 1) / 2);
    EXPECT_LE(e.exploit_epoch, k);
    const bool boundary = std::any_of(tr.checkpoints.begin(), tr.checkpoints.end(),
                                      [&](const Checkpoint& c) { return c.turn == end; });
    EXPECT_TRUE(boundary);
  }
  EXPECT_EQ(tr.final_regret, tr.epochs.back().regret_at_end);
}

// Exploit-phase regret equals the exploit profile's instantaneous regret
// times the phase length.
TEST(RunSingle, ExploitRegretIsExact) {
  const auto u1 = matrices::u1();
  ExperimentConfig cfg = quick(6);
  cfg.stride = 1;
  const auto tr = run_single(u1, cfg, 7);
  for (const auto& e : tr.epochs) {
    const auto at = [&](std::uint64_t t) { return tr.checkpoints[t - 1].regret; };
    const double inc = at(e.end_turn) - at(e.exploit_start - 1);
    EXPECT_NEAR(inc, instantaneous_regret(u1, 0.5, e.exploit_profile) * double(e.end_turn - e.exploit_start + 1),
                1e-6);
  }
}

TEST(RunSingle, Deterministic) {
  const auto cfg = quick(6);
  EXPECT_EQ(run_single(matrices::u2(), cfg, 5), run_single(matrices::u2(), cfg, 5));
  EXPECT_NE(run_single(matrices::u2(), cfg, 5).final_regret, run_single(matrices::u2(), cfg, 6).final_regret);
}

TEST(RunSingle, TruncatedHorizon) {
  auto cfg = quick(3);
  cfg.horizon += 17;
  const auto tr = run_single(matrices::u1(), cfg, 1);
  EXPECT_EQ(tr.epochs.size(), 3u);
  EXPECT_EQ(tr.epochs_started, 4u);
  EXPECT_EQ(tr.checkpoints.back().turn, cfg.horizon);
  EXPECT_EQ(tr.checkpoints.back().phase, Phase::Explore);
}

TEST(ConvergenceEpoch, Rules) {
  RunTrace tr;
  EXPECT_FALSE(convergence_epoch(tr).has_value());
  for (bool ok : {false, true, false, true, true}) {
    EpochDiagnostics d;
    d.epoch = tr.epochs.size() + 1;
    d.exploit_optimal = ok;
    tr.epochs.push_back(d);
  }
  EXPECT_EQ(convergence_epoch(tr), 4u);
  tr.epochs.back().exploit_optimal = false;
  EXPECT_FALSE(convergence_epoch(tr).has_value());
}

TEST(RunBatch, SingleRunHasZeroSpread) {
  auto cfg = quick(4);
  cfg.runs = 1;
  const auto b = run_batch(matrices::u1(), cfg);
  ASSERT_EQ(b.traces.size(), 1u);
  for (std::size_t i = 0; i < b.summary.turns.size(); ++i) {
    EXPECT_EQ(b.summary.mean[i], b.traces[0].checkpoints[i].regret);
    EXPECT_EQ(b.summary.stddev[i], 0.0);
  }
}

TEST(RunBatch, IdenticalTracesHaveZeroSpread) {
  const auto t = run_single(matrices::u1(), quick(4), 3);
  const auto s = summarize({t, t});
  for (double v : s.stddev) EXPECT_EQ(v, 0.0);
}

TEST(RunBatch, ThreadCountDoesNotMatter) {
  auto cfg = quick(5);
  cfg.runs = 6;
  cfg.threads = 1;
  const auto a = run_batch(matrices::u1(), cfg);
  cfg.threads = 4;
  const auto b = run_batch(matrices::u1(), cfg);
  EXPECT_EQ(a.traces, b.traces);
  EXPECT_EQ(a.summary.mean, b.summary.mean);
  EXPECT_EQ(a.summary.stddev, b.summary.stddev);
  for (std::size_t r = 0; r < 6; ++r) EXPECT_EQ(a.traces[r].seed, run_seed(cfg.seed, r));
}

TEST(RunBatch, MeanAndStdAgainstDirectComputation) {
  auto cfg = quick(4);
  cfg.runs = 5;
  const auto b = run_batch(matrices::u1(), cfg);
  for (std::size_t c = 0; c < b.summary.turns.size(); ++c) {
    double s = 0, ss = 0;
    for (const auto& t : b.traces) s += t.checkpoints[c].regret;
    const double mean = s / 5;
    for (const auto& t : b.traces) ss += (t.checkpoints[c].regret - mean) * (t.checkpoints[c].regret - mean);
    EXPECT_NEAR(b.summary.mean[c], mean, 1e-9);
    EXPECT_NEAR(b.summary.stddev[c], std::sqrt(ss / 5), 1e-9);
    EXPECT_GE(b.summary.stddev[c], 0.0);
  }
}

TEST(RunBatch, Validation) {
  auto cfg = quick(2);
  cfg.runs = 0;
  EXPECT_THROW(run_batch(matrices::u1(), cfg), std::invalid_argument);
  cfg.runs = 1;
  cfg.stride = 0;
  EXPECT_THROW(run_batch(matrices::u1(), cfg), std::invalid_argument);
  EXPECT_THROW(summarize({}), std::invalid_argument);
}

TEST(Seeds, DistinctStreams) {
  std::set<std::uint64_t> seen;
  for (std::size_t r = 0; r < 100; ++r) {
    const auto s = run_seed(1, r);
    seen.insert(s);
    seen.insert(environment_seed(s));
    for (std::size_t n = 0; n < 10; ++n) seen.insert(agent_seed(s, n));
  }
  EXPECT_EQ(seen.size(), 100u * 12u);
}
