#pragma once

// Cumulative-Gaussian psychometric curves for the two-interval task:
// P(second | dC) = H((dC + b) / sigma).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <utility>
#include <stdexcept>
#include <vector>

#include "nelder_mead.hpp"
#include "random.hpp"
#include "special_functions.hpp"
#include "types.hpp"

namespace hapdec {

using special::std_normal_cdf;

/// Bias b and width sigma (both in % contrast). sigma > 0 always.
class PsychCurve {
 public:
  PsychCurve(double bias_b, double sigma) : bias_b_(bias_b), sigma_(sigma) {
    if (!std::isfinite(bias_b)) throw std::invalid_argument("PsychCurve: bias must be finite");
    if (!(sigma > 0.0) || !std::isfinite(sigma))
      throw std::invalid_argument("PsychCurve: sigma must be positive and finite");
  }

  double bias() const { return bias_b_; }
  double sigma() const { return sigma_; }

  friend bool operator==(const PsychCurve&, const PsychCurve&) = default;

 private:
  double bias_b_;
  double sigma_;
};

inline double prob_second(const PsychCurve& c, double delta_c) {
  return std_normal_cdf((delta_c + c.bias()) / c.sigma());
}

/// Maximum slope 1/sqrt(2 pi sigma^2).
inline double slope(const PsychCurve& c) {
  return 1.0 / std::sqrt(2.0 * std::numbers::pi * c.sigma() * c.sigma());
}

inline double sigma_from_slope(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("sigma_from_slope: slope must be positive");
  return 1.0 / (s * std::sqrt(2.0 * std::numbers::pi));
}

/// The eight signed contrast differences of the experimental design.
inline const std::vector<double>& canonical_levels() {
  static const std::vector<double> levels{-15.0, -7.0, -3.5, -1.5, 1.5, 3.5, 7.0, 15.0};
  return levels;
}

/// Binomial counts of "second" responses per contrast level. Rows are kept
/// sorted by level; construction from unsorted input sorts them.
class ResponseTable {
 public:
  struct Row {
    double level;
    int trials;
    int second_chosen;
  };

  ResponseTable() = default;

  explicit ResponseTable(std::vector<Row> rows) : rows_(std::move(rows)) {
    std::sort(rows_.begin(), rows_.end(), [](const Row& a, const Row& b) { return a.level < b.level; });
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const Row& r = rows_[i];
      if (!std::isfinite(r.level)) throw std::invalid_argument("ResponseTable: level must be finite");
      if (r.trials < 1) throw std::invalid_argument("ResponseTable: trials per level must be positive");
      if (r.second_chosen < 0 || r.second_chosen > r.trials)
        throw std::invalid_argument("ResponseTable: second_chosen must lie in [0, trials]");
      if (i > 0 && rows_[i - 1].level == r.level)
        throw std::invalid_argument("ResponseTable: duplicate level");
    }
  }

  const std::vector<Row>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  double proportion(std::size_t i) const {
    return static_cast<double>(rows_[i].second_chosen) / rows_[i].trials;
  }

 private:
  std::vector<Row> rows_;
};

/// Aggregates trial-level responses into a table (one row per distinct level).
inline ResponseTable tally_responses(std::span<const double> delta_c, std::span<const Choice> choices) {
  if (delta_c.size() != choices.size()) throw std::invalid_argument("tally_responses: size mismatch");
  std::vector<ResponseTable::Row> rows;
  for (std::size_t i = 0; i < delta_c.size(); ++i) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const auto& r) { return r.level == delta_c[i]; });
    if (it == rows.end()) {
      rows.push_back({delta_c[i], 0, 0});
      it = rows.end() - 1;
    }
    ++it->trials;
    if (choices[i] == Choice::second) ++it->second_chosen;
  }
  return ResponseTable(std::move(rows));
}

inline ResponseTable simulate_responses(const PsychCurve& curve, std::span<const double> levels,
                                        int trials_per_level, Rng& rng) {
  if (levels.empty()) throw std::invalid_argument("simulate_responses: no levels");
  if (trials_per_level < 1) throw std::invalid_argument("simulate_responses: trials_per_level must be >= 1");
  std::vector<ResponseTable::Row> rows;
  rows.reserve(levels.size());
  for (double level : levels) {
    std::binomial_distribution<int> draw(trials_per_level, prob_second(curve, level));
    rows.push_back({level, trials_per_level, draw(rng)});
  }
  return ResponseTable(std::move(rows));
}

struct FitResult {
  PsychCurve curve{0.0, 1.0};
  double sse = 0.0;
  bool converged = false;
  int iterations = 0;
};

struct FitOptions {
  double sigma_min = 0.05;
  double sigma_max = 100.0;
  std::vector<double> sigma_starts{1.0, 3.0, 8.0, 20.0};
  optim::SimplexOptions simplex{};
};

namespace detail {

/// dC at which the empirical proportion crosses 0.5 (linear interpolation),
/// or the level whose proportion is closest to 0.5 when there is no crossing.
/// `pts` is sorted by level.
inline double half_crossing(const std::vector<std::pair<double, double>>& pts) {
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double p0 = pts[i].second - 0.5;
    const double p1 = pts[i + 1].second - 0.5;
    if (p0 <= 0.0 && p1 >= 0.0 && p0 != p1) {
      const double l0 = pts[i].first;
      const double l1 = pts[i + 1].first;
      return l0 + (-p0) * (l1 - l0) / (p1 - p0);
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (std::fabs(pts[i].second - 0.5) < std::fabs(pts[best].second - 0.5)) best = i;
  return pts[best].first;
}

}  // namespace detail

/// Unweighted least squares of a cumulative Gaussian through (level, proportion)
/// pairs; multi-start simplex. Pair order does not matter.
inline FitResult fit_proportions(std::span<const double> levels, std::span<const double> proportions,
                                 const FitOptions& opts = {}) {
  if (levels.size() != proportions.size()) throw std::invalid_argument("fit_proportions: size mismatch");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!std::isfinite(levels[i]) || !(proportions[i] >= 0.0 && proportions[i] <= 1.0))
      throw std::invalid_argument("fit_proportions: levels must be finite and proportions in [0, 1]");
    pts.emplace_back(levels[i], proportions[i]);
  }
  std::sort(pts.begin(), pts.end());
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pts[i].first == pts[i - 1].first) throw std::invalid_argument("fit_proportions: duplicate level");
  if (pts.size() < 3) throw std::invalid_argument("fit_curve: need at least 3 distinct levels");

  const auto clamp_sigma = [&](double s) { return std::clamp(s, opts.sigma_min, opts.sigma_max); };
  const auto sse_at = [&](double b, double sigma) {
    double sse = 0.0;
    for (const auto& [level, p] : pts) {
      const double r = p - std_normal_cdf((level + b) / sigma);
      sse += r * r;
    }
    return sse;
  };
  // Outside the sigma box the objective is the boundary value plus a quadratic wall.
  const auto objective = [&](const optim::Point<2>& x) {
    if (!std::isfinite(x[0]) || !std::isfinite(x[1]) || std::fabs(x[0]) > 1e6)
      return std::numeric_limits<double>::infinity();
    const double s = clamp_sigma(x[1]);
    return sse_at(x[0], s) + (x[1] - s) * (x[1] - s);
  };

  const double b0 = -detail::half_crossing(pts);
  optim::SimplexResult<2> best;
  best.value = std::numeric_limits<double>::infinity();
  int total_iterations = 0;
  for (double s0 : opts.sigma_starts) {
    auto r = optim::nelder_mead<2>(objective, {b0, s0}, {1.0, 0.5 * s0}, opts.simplex);
    total_iterations += r.iterations;
    if (r.value < best.value) best = r;
  }
  // Final restart from the best vertex with a fresh simplex.
  const double sb = clamp_sigma(best.x[1]);
  auto polished = optim::nelder_mead<2>(objective, {best.x[0], sb}, {0.1, 0.1 * sb}, opts.simplex);
  total_iterations += polished.iterations;
  if (polished.value <= best.value) best = polished;

  FitResult out;
  out.iterations = total_iterations;
  out.converged = polished.converged;
  double sigma = clamp_sigma(best.x[1]);

  const bool degenerate = std::all_of(pts.begin(), pts.end(),
                                      [&](const auto& pt) { return pt.second == pts.front().second; });
  if (degenerate) {
    out.converged = false;
    sigma = std::log(sigma / opts.sigma_min) < std::log(opts.sigma_max / sigma) ? opts.sigma_min
                                                                                  : opts.sigma_max;
  }
  out.curve = PsychCurve(best.x[0], sigma);
  out.sse = sse_at(best.x[0], sigma);
  return out;
}

inline FitResult fit_curve(const ResponseTable& table, const FitOptions& opts = {}) {
  if (table.size() < 3) throw std::invalid_argument("fit_curve: need at least 3 distinct levels");
  std::vector<double> levels, props;
  for (std::size_t i = 0; i < table.size(); ++i) {
    levels.push_back(table.rows()[i].level);
    props.push_back(table.proportion(i));
  }
  return fit_proportions(levels, props, opts);
}

}  // namespace hapdec
