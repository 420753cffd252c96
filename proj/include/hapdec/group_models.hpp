#pragma once

// Dyad predictions from the two members' psychometric curves.
//
//   WCS  b = (s2 b1 + s1 b2)/(s1 + s2),  sigma = sqrt2 s1 s2 / (s1 + s2)      (sigmas)
//   DSS  b = (s2^2 b1 + s1^2 b2)/(s1^2 + s2^2),  sigma = s1 s2 / sqrt(s1^2 + s2^2)
//   CF   P = (P1 + P2)/2   (disagreements settled by a fair coin; no Gaussian form)
//   BF   the more sensitive member's curve (tie -> member 1)

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "psychometrics.hpp"
#include "random.hpp"
#include "types.hpp"

namespace hapdec {

enum class GroupModel { wcs, cf, bf, dss };

inline std::string_view to_string(GroupModel m) {
  switch (m) {
    case GroupModel::wcs: return "WCS";
    case GroupModel::cf: return "CF";
    case GroupModel::bf: return "BF";
    case GroupModel::dss: return "DSS";
  }
  return "?";
}

struct DyadPrediction {
  GroupModel model;
  /// Closed-form Gaussian (WCS, BF, DSS); empty for CF.
  std::optional<PsychCurve> curve;
  /// For CF, the Gaussian fitted to the mixture on the canonical levels.
  std::optional<PsychCurve> equivalent;
  std::function<double(double)> probability;

  /// The closed-form curve or, for CF, its equivalent.
  const PsychCurve& summary_curve() const { return curve ? *curve : equivalent.value(); }
  double predicted_slope() const { return slope(summary_curve()); }
};

inline DyadPrediction wcs_dyad(const PsychCurve& c1, const PsychCurve& c2) {
  const double s1 = c1.sigma();
  const double s2 = c2.sigma();
  const PsychCurve dyad((s2 * c1.bias() + s1 * c2.bias()) / (s1 + s2),
                        std::numbers::sqrt2 * s1 * s2 / (s1 + s2));
  return {GroupModel::wcs, dyad, std::nullopt, [dyad](double dc) { return prob_second(dyad, dc); }};
}

inline double wcs_slope(double s1, double s2) {
  if (!(s1 > 0.0) || !(s2 > 0.0)) throw std::invalid_argument("wcs_slope: sensitivities must be positive");
  return (s1 + s2) / std::numbers::sqrt2;
}

/// s_dyad / s_max under WCS as a function of s_min / s_max.
inline double collective_benefit(double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw std::invalid_argument("collective_benefit: ratio must lie in (0, 1]");
  constexpr double half_sqrt2 = std::numbers::sqrt2 / 2.0;
  return half_sqrt2 + half_sqrt2 * ratio;
}

/// Ratio above which WCS dyads beat their best member.
inline constexpr double benefit_threshold = std::numbers::sqrt2 - 1.0;

/// WCS benefit when the dyad over-weights its more skilled member (weights alpha < beta).
inline double biased_wcs_benefit(double ratio, double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("biased_wcs_benefit: weights must be positive");
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw std::invalid_argument("biased_wcs_benefit: ratio must lie in [0, 1]");
  constexpr double half_sqrt2 = std::numbers::sqrt2 / 2.0;
  return half_sqrt2 + half_sqrt2 * (alpha * ratio) / beta;
}

inline DyadPrediction cf_dyad(const PsychCurve& c1, const PsychCurve& c2) {
  auto p = [c1, c2](double dc) { return 0.5 * (prob_second(c1, dc) + prob_second(c2, dc)); };
  const auto& levels = canonical_levels();
  std::vector<double> props;
  props.reserve(levels.size());
  for (double l : levels) props.push_back(p(l));
  const FitResult eq = fit_proportions(levels, props);
  return {GroupModel::cf, std::nullopt, eq.curve, p};
}

inline DyadPrediction bf_dyad(const PsychCurve& c1, const PsychCurve& c2) {
  const PsychCurve best = slope(c2) > slope(c1) ? c2 : c1;
  return {GroupModel::bf, best, std::nullopt, [best](double dc) { return prob_second(best, dc); }};
}

inline DyadPrediction dss_dyad(const PsychCurve& c1, const PsychCurve& c2) {
  const double v1 = c1.sigma() * c1.sigma();
  const double v2 = c2.sigma() * c2.sigma();
  const PsychCurve dyad((v2 * c1.bias() + v1 * c2.bias()) / (v1 + v2),
                        c1.sigma() * c2.sigma() / std::sqrt(v1 + v2));
  return {GroupModel::dss, dyad, std::nullopt, [dyad](double dc) { return prob_second(dyad, dc); }};
}

inline DyadPrediction predict_dyad(GroupModel m, const PsychCurve& c1, const PsychCurve& c2) {
  switch (m) {
    case GroupModel::wcs: return wcs_dyad(c1, c2);
    case GroupModel::cf: return cf_dyad(c1, c2);
    case GroupModel::bf: return bf_dyad(c1, c2);
    case GroupModel::dss: return dss_dyad(c1, c2);
  }
  throw std::invalid_argument("predict_dyad: unknown model");
}

/// Group decision by the sign of the summed confidence ratios x/sigma.
/// An exact zero sum is settled by a fair coin from `rng`.
inline Choice wcs_group_choice(double x1, double sigma1, double x2, double sigma2, Rng& rng) {
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) throw std::invalid_argument("wcs_group_choice: sigmas must be positive");
  const double sum = x1 / sigma1 + x2 / sigma2;
  if (sum > 0.0) return Choice::second;
  if (sum < 0.0) return Choice::first;
  return coin_flip(rng) ? Choice::second : Choice::first;
}

/// Monte-Carlo response table of the WCS decision rule: each trial draws
/// x_i ~ N(dC + b_i, sigma_i) for both members and records the group choice.
inline ResponseTable simulate_wcs_responses(const PsychCurve& c1, const PsychCurve& c2,
                                            std::span<const double> levels, int trials_per_level, Rng& rng) {
  if (levels.empty()) throw std::invalid_argument("simulate_wcs_responses: no levels");
  if (trials_per_level < 1) throw std::invalid_argument("simulate_wcs_responses: trials_per_level must be >= 1");
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<ResponseTable::Row> rows;
  for (double level : levels) {
    int second = 0;
    for (int t = 0; t < trials_per_level; ++t) {
      const double x1 = level + c1.bias() + c1.sigma() * unit(rng);
      const double x2 = level + c2.bias() + c2.sigma() * unit(rng);
      if (wcs_group_choice(x1, c1.sigma(), x2, c2.sigma(), rng) == Choice::second) ++second;
    }
    rows.push_back({level, trials_per_level, second});
  }
  return ResponseTable(std::move(rows));
}

struct DyadTables {
  ResponseTable member1;
  ResponseTable member2;
  ResponseTable group;
};

/// Member and WCS group tables built from the same draws, the way a real
/// session scores both members and their dyad on each trial.
inline DyadTables simulate_dyad_tables(const PsychCurve& c1, const PsychCurve& c2, std::span<const double> levels,
                                       int trials_per_level, Rng& rng) {
  if (levels.empty()) throw std::invalid_argument("simulate_dyad_tables: no levels");
  if (trials_per_level < 1) throw std::invalid_argument("simulate_dyad_tables: trials_per_level must be >= 1");
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<ResponseTable::Row> r1, r2, rg;
  for (double level : levels) {
    int n1 = 0, n2 = 0, ng = 0;
    for (int t = 0; t < trials_per_level; ++t) {
      const double x1 = level + c1.bias() + c1.sigma() * unit(rng);
      const double x2 = level + c2.bias() + c2.sigma() * unit(rng);
      n1 += x1 > 0.0 || (x1 == 0.0 && coin_flip(rng));
      n2 += x2 > 0.0 || (x2 == 0.0 && coin_flip(rng));
      ng += wcs_group_choice(x1, c1.sigma(), x2, c2.sigma(), rng) == Choice::second;
    }
    r1.push_back({level, trials_per_level, n1});
    r2.push_back({level, trials_per_level, n2});
    rg.push_back({level, trials_per_level, ng});
  }
  return {ResponseTable(std::move(r1)), ResponseTable(std::move(r2)), ResponseTable(std::move(rg))};
}

}  // namespace hapdec
