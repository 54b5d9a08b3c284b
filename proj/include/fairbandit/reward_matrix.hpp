#ifndef FAIRBANDIT_REWARD_MATRIX_HPP
#define FAIRBANDIT_REWARD_MATRIX_HPP

#include <cstddef>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fairbandit {

/// Expected rewards mu(n, i) of player n on arm i. Requires arms >= players
/// and every entry in [0, 1].
class RewardMatrix {
 public:
  RewardMatrix(std::size_t players, std::size_t arms, std::vector<double> mu)
      : players_(players), arms_(arms), mu_(std::move(mu)) {
    if (players_ == 0 || arms_ == 0) {
      throw std::invalid_argument("reward matrix must have at least one player and one arm");
    }
    if (arms_ < players_) {
      throw std::invalid_argument("reward matrix needs at least as many arms as players (got " +
                                  std::to_string(players_) + " players, " + std::to_string(arms_) +
                                  " arms)");
    }
    if (mu_.size() != players_ * arms_) {
      throw std::invalid_argument("reward matrix data has wrong size");
    }
    for (double v : mu_) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument("reward matrix entry outside [0, 1]: " + std::to_string(v));
      }
    }
  }

  static RewardMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw std::invalid_argument("reward matrix has no rows");
    const std::size_t arms = rows.front().size();
    std::vector<double> flat;
    flat.reserve(rows.size() * arms);
    for (const auto& r : rows) {
      if (r.size() != arms) throw std::invalid_argument("reward matrix rows have unequal length");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return RewardMatrix(rows.size(), arms, std::move(flat));
  }

  std::size_t players() const noexcept { return players_; }
  std::size_t arms() const noexcept { return arms_; }

  double operator()(std::size_t player, std::size_t arm) const noexcept {
    return mu_[player * arms_ + arm];
  }

  const std::vector<double>& data() const noexcept { return mu_; }

  friend bool operator==(const RewardMatrix&, const RewardMatrix&) = default;

 private:
  std::size_t players_;
  std::size_t arms_;
  std::vector<double> mu_;
};

namespace matrices {

/// 4x4 instance with a single max-min optimal matching of value 1/2.
inline RewardMatrix u1() {
  return RewardMatrix::from_rows({
      {0.5, 0.9, 0.1, 0.25},
      {0.25, 0.5, 0.25, 0.1},
      {0.1, 0.25, 0.5, 0.5},
      {0.1, 0.9, 0.25, 0.5},
  });
}

/// 10x10 instance with max-min value 0.4.
inline RewardMatrix u2() {
  return RewardMatrix::from_rows({
      {0.9, 0.4, 0.8, 0.1, 0.3, 0.05, 0.2, 0.1, 0.3, 0.2},
      {0.4, 0.3, 0.3, 0.1, 0.2, 0.3, 0.4, 0.4, 0.3, 0.4},
      {0.1, 0.05, 0.1, 0.4, 0.1, 0.2, 0.9, 0.3, 0.4, 0.1},
      {0.05, 0.1, 0.9, 0.2, 0.9, 0.75, 0.1, 0.9, 0.25, 0.05},
      {0.8, 0.3, 0.1, 0.7, 0.1, 0.4, 0.05, 0.2, 0.75, 0.05},
      {0.4, 0.05, 0.3, 0.7, 0.05, 0.1, 0.25, 0.75, 0.6, 0.05},
      {0.9, 0.3, 0.3, 0.8, 0.1, 0.25, 0.7, 0.05, 0.2, 0.3},
      {0.3, 0.1, 0.4, 0.25, 0.05, 0.9, 0.25, 0.1, 0.05, 0.4},
      {0.8, 0.75, 0.1, 0.2, 0.4, 0.05, 0.3, 0.2, 0.1, 0.25},
      {0.4, 0.4, 0.9, 0.7, 0.25, 0.2, 0.05, 0.1, 0.4, 0.25},
  });
}

}  // namespace matrices

/// Reads one row per player of whitespace-separated decimals. Blank lines and
/// text after '#' are ignored.
inline RewardMatrix parse_reward_matrix(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) {
        throw std::invalid_argument("line " + std::to_string(line_no) + ": not a number: '" + tok +
                                    "'");
      }
      row.push_back(v);
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return RewardMatrix::from_rows(rows);
}

inline RewardMatrix load_reward_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open matrix file: " + path);
  return parse_reward_matrix(in);
}

/// "u1" and "u2" name the built-in instances; anything else is a file path.
inline RewardMatrix resolve_reward_matrix(const std::string& selector) {
  if (selector == "u1") return matrices::u1();
  if (selector == "u2") return matrices::u2();
  return load_reward_matrix_file(selector);
}

}  // namespace fairbandit

#endif  // FAIRBANDIT_REWARD_MATRIX_HPP
