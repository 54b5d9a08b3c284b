#ifndef FAIRBANDIT_TOOLS_CLI_HPP
#define FAIRBANDIT_TOOLS_CLI_HPP

// Command-line front end: oracle | run | batch | dynamics.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fairbandit/fairbandit.hpp"

#ifndef FAIRBANDIT_VERSION
#define FAIRBANDIT_VERSION "dev"
#endif

namespace fairbandit::cli {

/// Every knob a subcommand can take. Precedence: flag > config file > default.
struct Settings {
  std::string matrix;
  ExperimentConfig experiment;
  std::optional<std::uint64_t> epochs;  // overrides horizon with whole epochs
  std::string out = "out";
  double gamma = 0.0;
  std::size_t trials = 10000;
  std::uint64_t cap = 100000;
};

inline const std::set<std::string>& config_keys() {
  static const std::set<std::string> keys = {
      "matrix", "noise",  "c1",     "c2",      "c3",     "ci_scale", "epsilon_scale",
      "warm_start", "use_collision_bit", "horizon", "epochs", "runs", "seed", "stride",
      "threads", "out",  "gamma",  "trials",  "cap"};
  return keys;
}

/// Applies a flat JSON object of settings. Unknown keys are an error.
inline void apply_config(const nlohmann::json& doc, Settings& s) {
  if (!doc.is_object()) throw std::runtime_error("config must be a JSON object of flat keys");
  for (const auto& [key, value] : doc.items()) {
    if (!config_keys().count(key)) throw std::runtime_error("unknown config key: " + key);
  }
  auto& e = s.experiment;
  auto get = [&](const char* key, auto& field) {
    if (doc.contains(key)) doc.at(key).get_to(field);
  };
  get("matrix", s.matrix);
  get("noise", e.noise);
  get("c1", e.agent.c1);
  get("c2", e.agent.c2);
  get("c3", e.agent.c3);
  get("ci_scale", e.agent.ci_scale);
  get("epsilon_scale", e.agent.epsilon_scale);
  get("warm_start", e.agent.warm_start);
  get("use_collision_bit", e.agent.use_collision_bit);
  get("horizon", e.horizon);
  if (doc.contains("epochs")) s.epochs = doc.at("epochs").get<std::uint64_t>();
  get("runs", e.runs);
  get("seed", e.seed);
  get("stride", e.stride);
  get("threads", e.threads);
  get("out", s.out);
  get("gamma", s.gamma);
  get("trials", s.trials);
  get("cap", s.cap);
}

inline void load_config_file(const std::string& path, Settings& s) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& ex) {
    throw std::runtime_error("config file " + path + ": " + ex.what());
  }
  apply_config(doc, s);
}

inline std::string join_arms(const StrategyProfile& p) {
  std::string s;
  for (std::size_t n = 0; n < p.size(); ++n) {
    if (n) s += ' ';
    s += std::to_string(p[n] + 1);
  }
  return s;
}

/// Prints `key = value` lines to `out` and records the same strings in the manifest.
class Report {
 public:
  explicit Report(std::ostream& out) : out_(out) {}
  void operator()(const std::string& key, const std::string& value) {
    out_ << key << " = " << value << '\n';
    manifest_.add(key, value);
  }
  Manifest& manifest() { return manifest_; }

 private:
  std::ostream& out_;
  Manifest manifest_;
};

inline void cmd_oracle(const std::string& selector, std::ostream& out) {
  const RewardMatrix m = resolve_reward_matrix(selector);
  const auto best = gamma_star(m);
  out << "matrix = " << selector << " (" << m.players() << " players x " << m.arms() << " arms)\n";
  out << "gamma_star = " << format_report(best.value) << '\n';
  out << "gamma_star_assignment = " << join_arms(best.assignment) << '\n';
  try {
    const auto h = matching_histogram(m);
    out << "matchings_total = " << h.total << '\n';
    for (auto it = h.count.rbegin(); it != h.count.rend(); ++it) {
      out << "matchings_with_min " << format_report(it->first) << " = " << it->second << '\n';
    }
  } catch (const EnumerationTooLarge& ex) {
    out << "histogram skipped: " << ex.what() << '\n';
  }
  const auto ms = max_sum_matching(m);
  out << "max_sum = " << format_report(ms.sum) << '\n';
  out << "max_sum_assignment = " << join_arms(ms.assignment) << '\n';
  out << "max_sum_bottleneck = " << format_report(ms.bottleneck) << '\n';
  if (m.arms() >= 2) out << "minimal_gap = " << format_report(minimal_gap(m).delta) << '\n';
}

namespace detail {

inline void report_config(Report& r, const std::string& command, const Settings& s,
                          const RewardMatrix& m, double gstar) {
  const auto& e = s.experiment;
  r("version", FAIRBANDIT_VERSION);
  r("command", command);
  r("matrix", s.matrix);
  r("players", std::to_string(m.players()));
  r("arms", std::to_string(m.arms()));
  r("gamma_star", format_number(gstar));
  r("noise", format_number(e.noise));
  r("c1", format_number(e.agent.c1));
  r("c2", format_number(e.agent.c2));
  r("c3", format_number(e.agent.c3));
  r("ci_scale", format_number(e.agent.ci_scale));
  r("epsilon_scale", format_number(e.agent.epsilon_scale));
  r("warm_start", e.agent.warm_start ? "true" : "false");
  r("use_collision_bit", e.agent.use_collision_bit ? "true" : "false");
  r("horizon", std::to_string(e.horizon));
  r("stride", std::to_string(e.stride));
  r("seed", std::to_string(e.seed));
}

inline std::string epoch_text(const std::optional<std::uint64_t>& k) {
  return k ? std::to_string(*k) : std::string("none");
}

inline ExperimentConfig resolved(const Settings& s, const RewardMatrix& m) {
  ExperimentConfig e = s.experiment;
  e.agent.arms = m.arms();
  if (s.epochs) e.horizon = turns_for_epochs(*s.epochs, e.agent);
  e.validate();
  e.agent.validate();
  return e;
}

}  // namespace detail

inline void cmd_run(Settings s, std::ostream& out) {
  const RewardMatrix m = resolve_reward_matrix(s.matrix);
  s.experiment = detail::resolved(s, m);
  const double gstar = gamma_star(m).value;
  const std::uint64_t seed = s.experiment.seed;
  const RunTrace trace = run_single(m, gstar, s.experiment, seed);

  std::filesystem::create_directories(s.out);
  const auto dir = std::filesystem::path(s.out);
  write_trace_csv(trace, (dir / "trace.csv").string());
  write_epochs_csv(trace, (dir / "epochs.csv").string());
  emit_plot_svg(summarize({trace}), (dir / "regret.svg").string(), "Total regret (single run)");

  Report r(out);
  detail::report_config(r, "run", s, m, gstar);
  r("run_seed", std::to_string(seed));
  r("epochs_started", std::to_string(trace.epochs_started));
  r("final_regret", format_number(trace.final_regret));
  r("convergence_epoch", detail::epoch_text(convergence_epoch(trace)));
  r.manifest().write((dir / "manifest.txt").string());
}

inline void cmd_batch(Settings s, std::ostream& out) {
  const RewardMatrix m = resolve_reward_matrix(s.matrix);
  s.experiment = detail::resolved(s, m);
  const double gstar = gamma_star(m).value;
  const BatchResult batch = run_batch(m, s.experiment);

  std::filesystem::create_directories(s.out);
  const auto dir = std::filesystem::path(s.out);
  write_summary_csv(batch.summary, (dir / "summary.csv").string());
  emit_plot_svg(batch.summary, (dir / "regret.svg").string(),
                "Total regret, mean of " + std::to_string(batch.summary.runs) + " runs");

  Report r(out);
  detail::report_config(r, "batch", s, m, gstar);
  r("runs", std::to_string(s.experiment.runs));
  std::string seeds, conv;
  std::size_t converged = 0;
  for (std::size_t i = 0; i < batch.traces.size(); ++i) {
    if (i) {
      seeds += ' ';
      conv += ' ';
    }
    seeds += std::to_string(batch.traces[i].seed);
    conv += detail::epoch_text(batch.summary.convergence[i]);
    if (batch.summary.convergence[i]) ++converged;
  }
  r("run_seeds", seeds);
  r("final_mean_regret", format_number(batch.summary.mean.back()));
  r("final_std_regret", format_number(batch.summary.stddev.back()));
  r("runs_converged", std::to_string(converged));
  r("convergence_epochs", conv);
  r.manifest().write((dir / "manifest.txt").string());
}

inline void cmd_dynamics(const Settings& s, std::ostream& out) {
  const RewardMatrix m = resolve_reward_matrix(s.matrix);
  const BipartiteGraph g = threshold_graph(m, s.gamma);
  const auto mm = max_bipartite_matching(g);
  if (mm.size != m.players()) {
    throw std::runtime_error("no perfect matching at gamma = " + format_report(s.gamma) +
                             " (largest matching covers " + std::to_string(mm.size) + " of " +
                             std::to_string(m.players()) + " players)");
  }
  const auto a = estimate_absorption_time(g, s.trials, s.cap, s.experiment.seed);
  out << "matrix = " << s.matrix << '\n';
  out << "gamma = " << format_report(s.gamma) << '\n';
  out << "trials = " << a.trials << '\n';
  out << "cap = " << s.cap << '\n';
  out << "seed = " << s.experiment.seed << '\n';
  out << "mean_absorption_time = " << format_report(a.mean) << '\n';
  out << "max_absorption_time = " << a.max << '\n';
  out << "fraction_absorbed = " << format_report(a.fraction_absorbed) << '\n';
}

/// Parses argv and dispatches. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Distributed max-min fair multi-player bandit simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", FAIRBANDIT_VERSION);

  Settings flags;
  std::string config_path;
  auto& e = flags.experiment;

  auto* oracle = app.add_subcommand("oracle", "Max-min value, matching statistics, max-sum baseline");
  auto* run_cmd = app.add_subcommand("run", "Simulate one seeded game");
  auto* batch = app.add_subcommand("batch", "Simulate many seeded games and aggregate");
  auto* dynamics = app.add_subcommand("dynamics", "Absorption statistics of the matching dynamics");

  std::vector<CLI::Option*> tracked;
  auto track = [&](CLI::Option* o) {
    tracked.push_back(o);
    return o;
  };

  for (auto* sub : {oracle, run_cmd, batch, dynamics}) {
    track(sub->add_option("matrix,--matrix", flags.matrix, "u1, u2, or a path to a matrix file"));
    sub->add_option("--config", config_path, "JSON file of flat settings");
  }
  for (auto* sub : {run_cmd, batch}) {
    track(sub->add_option("--horizon", e.horizon, "Total turns"));
    track(sub->add_option("--epochs", flags.epochs, "Horizon covering this many whole epochs"));
    track(sub->add_option("--noise", e.noise, "Half-width of uniform reward noise"));
    track(sub->add_option("--c1", e.agent.c1, "Exploration length factor"));
    track(sub->add_option("--c2", e.agent.c2, "Matching length factor"));
    track(sub->add_option("--c3", e.agent.c3, "Exploitation length factor"));
    track(sub->add_option("--ci-scale", e.agent.ci_scale, "Confidence interval multiplier"));
    track(sub->add_option("--epsilon-scale", e.agent.epsilon_scale, "Step-size numerator"));
    track(sub->add_flag("--no-warm-start{false}", e.agent.warm_start,
                        "Start matching from a uniform draw"));
    track(sub->add_flag("--infer-collisions{false}", e.agent.use_collision_bit,
                        "Treat zero reward as the collision signal"));
    track(sub->add_option("--stride", e.stride, "Turns between checkpoints"));
    track(sub->add_option("--out", flags.out, "Output directory"));
  }
  for (auto* sub : {run_cmd, batch, dynamics}) {
    track(sub->add_option("--seed", e.seed, "Master seed"));
  }
  track(batch->add_option("--runs", e.runs, "Number of runs"));
  track(batch->add_option("--threads", e.threads, "Worker threads (0: all cores)"));
  track(dynamics->add_option("--gamma", flags.gamma, "Threshold level"));
  track(dynamics->add_option("--trials", flags.trials, "Monte Carlo trials"));
  track(dynamics->add_option("--cap", flags.cap, "Step cap per trial"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    return app.exit(ex, out, err);
  }

  try {
    Settings s;
    if (!config_path.empty()) load_config_file(config_path, s);
    // Overlay only what was given on the command line.
    Settings merged = s;
    auto& me = merged.experiment;
    auto given = [&](const char* name) {
      for (auto* o : tracked)
        if (o->check_name(name) && o->count() > 0) return true;
      return false;
    };
    if (given("--matrix")) merged.matrix = flags.matrix;
    if (given("--horizon")) me.horizon = e.horizon;
    if (given("--epochs")) merged.epochs = flags.epochs;
    if (given("--noise")) me.noise = e.noise;
    if (given("--c1")) me.agent.c1 = e.agent.c1;
    if (given("--c2")) me.agent.c2 = e.agent.c2;
    if (given("--c3")) me.agent.c3 = e.agent.c3;
    if (given("--ci-scale")) me.agent.ci_scale = e.agent.ci_scale;
    if (given("--epsilon-scale")) me.agent.epsilon_scale = e.agent.epsilon_scale;
    if (given("--no-warm-start")) me.agent.warm_start = e.agent.warm_start;
    if (given("--infer-collisions")) me.agent.use_collision_bit = e.agent.use_collision_bit;
    if (given("--stride")) me.stride = e.stride;
    if (given("--out")) merged.out = flags.out;
    if (given("--seed")) me.seed = e.seed;
    if (given("--runs")) me.runs = e.runs;
    if (given("--threads")) me.threads = e.threads;
    if (given("--gamma")) merged.gamma = flags.gamma;
    if (given("--trials")) merged.trials = flags.trials;
    if (given("--cap")) merged.cap = flags.cap;

    if (merged.matrix.empty()) throw std::runtime_error("no matrix given (u1, u2, or a file path)");

    if (oracle->parsed()) {
      cmd_oracle(merged.matrix, out);
    } else if (run_cmd->parsed()) {
      cmd_run(merged, out);
    } else if (batch->parsed()) {
      cmd_batch(merged, out);
    } else if (dynamics->parsed()) {
      cmd_dynamics(merged, out);
    }
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace fairbandit::cli

#endif  // FAIRBANDIT_TOOLS_CLI_HPP
