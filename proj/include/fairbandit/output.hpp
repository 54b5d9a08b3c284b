#ifndef FAIRBANDIT_OUTPUT_HPP
#define FAIRBANDIT_OUTPUT_HPP

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fairbandit/harness.hpp"

namespace fairbandit {

/// Shortest decimal that parses back to exactly `v`.
inline std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, end);
}

/// Human-facing rounding for reports (at most 10 significant digits).
inline std::string format_report(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 10);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, end);
}

inline void write_trace_csv(const RunTrace& trace, std::ostream& out) {
  out << "turn,cumulative_regret,epoch,phase\n";
  for (const auto& c : trace.checkpoints) {
    out << c.turn << ',' << format_number(c.regret) << ',' << c.epoch << ','
        << (c.phase ? to_string(*c.phase) : std::string_view("none")) << '\n';
  }
}

inline void write_summary_csv(const BatchSummary& summary, std::ostream& out) {
  out << "turn,mean_regret,std_regret\n";
  for (std::size_t i = 0; i < summary.turns.size(); ++i) {
    out << summary.turns[i] << ',' << format_number(summary.mean[i]) << ','
        << format_number(summary.stddev[i]) << '\n';
  }
}

/// Per-epoch diagnostics of one run, one row per recorded epoch.
inline void write_epochs_csv(const RunTrace& trace, std::ostream& out) {
  out << "epoch,gamma,success,exploit_epoch,exploit_optimal,end_turn,regret_at_end\n";
  for (const auto& e : trace.epochs) {
    out << e.epoch << ',' << format_number(e.gamma) << ',' << (e.success ? 1 : 0) << ','
        << e.exploit_epoch << ',' << (e.exploit_optimal ? 1 : 0) << ',' << e.end_turn << ','
        << format_number(e.regret_at_end) << '\n';
  }
}

namespace detail {

template <class Fn>
void write_file(const std::string& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  fn(out);
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string fixed2(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, end);
}

}  // namespace detail

inline void write_trace_csv(const RunTrace& trace, const std::string& path) {
  detail::write_file(path, [&](std::ostream& o) { write_trace_csv(trace, o); });
}
inline void write_summary_csv(const BatchSummary& summary, const std::string& path) {
  detail::write_file(path, [&](std::ostream& o) { write_summary_csv(summary, o); });
}
inline void write_epochs_csv(const RunTrace& trace, const std::string& path) {
  detail::write_file(path, [&](std::ostream& o) { write_epochs_csv(trace, o); });
}

/// Mean cumulative regret against turn with a shaded +-1 std band.
inline void emit_plot_svg(const BatchSummary& summary, std::ostream& out,
                          std::string_view title = "Total regret") {
  if (summary.turns.empty()) throw std::invalid_argument("cannot plot an empty summary");
  constexpr double W = 640, H = 420, left = 80, right = 20, top = 40, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;

  const double xmax = static_cast<double>(std::max<std::uint64_t>(summary.turns.back(), 1));
  double ymax = 0.0;
  for (std::size_t i = 0; i < summary.mean.size(); ++i)
    ymax = std::max(ymax, summary.mean[i] + summary.stddev[i]);
  if (ymax <= 0.0) ymax = 1.0;

  auto px = [&](double x) { return detail::fixed2(left + pw * x / xmax); };
  auto py = [&](double y) { return detail::fixed2(top + ph * (1.0 - y / ymax)); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">"
      << title << "</text>\n";

  out << "<polygon class=\"band\" fill=\"#1f77b4\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
  for (std::size_t i = 0; i < summary.turns.size(); ++i) {
    out << px(static_cast<double>(summary.turns[i])) << ','
        << py(summary.mean[i] + summary.stddev[i]) << ' ';
  }
  for (std::size_t i = summary.turns.size(); i-- > 0;) {
    out << px(static_cast<double>(summary.turns[i])) << ','
        << py(std::max(0.0, summary.mean[i] - summary.stddev[i])) << ' ';
  }
  out << "\"/>\n";

  out << "<polyline class=\"mean\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < summary.turns.size(); ++i) {
    if (i) out << ' ';
    out << px(static_cast<double>(summary.turns[i])) << ',' << py(summary.mean[i]);
  }
  out << "\"/>\n";

  out << "<g stroke=\"black\" stroke-width=\"1\">\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\""
      << top + ph << "\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
      << "\"/>\n";
  out << "</g>\n";

  out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = xmax * k / 4.0, yv = ymax * k / 4.0;
    out << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">"
        << format_report(xv) << "</text>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) << "\" text-anchor=\"end\">"
        << format_report(yv) << "</text>\n";
  }
  out << "</g>\n";
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 16
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">turn</text>\n";
  out << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 " << top + ph / 2
      << ")\">cumulative regret</text>\n";
  out << "</svg>\n";
}

inline void emit_plot_svg(const BatchSummary& summary, const std::string& path,
                          std::string_view title = "Total regret") {
  detail::write_file(path, [&](std::ostream& o) { emit_plot_svg(summary, o, title); });
}

/// Ordered key/value record of a run: resolved config, seeds, gamma*, version.
class Manifest {
 public:
  void add(std::string key, std::string value) { entries_.emplace_back(std::move(key), std::move(value)); }
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  void write(std::ostream& out) const {
    for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
  }
  void write(const std::string& path) const {
    detail::write_file(path, [&](std::ostream& o) { write(o); });
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace fairbandit

#endif  // FAIRBANDIT_OUTPUT_HPP
