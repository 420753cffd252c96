#pragma once

// Psychometric fits of session records: both members from their individual
// responses, the dyad from its final choices.

#include <map>
#include <span>
#include <vector>

#include "../group_models.hpp"
#include "../psychometrics.hpp"
#include "../session.hpp"

namespace hapdec::harness {

/// Fewer completed disagreement trials than this flags the dyad fit.
inline constexpr int kMinDisagreementTrials = 20;

struct DyadFit {
  int dyad = 0;
  std::array<ResponseTable, 2> member_tables;
  ResponseTable group_table;
  std::array<FitResult, 2> members;
  FitResult group;
  int n_trials = 0;
  int n_disagreement = 0;
  int n_group_completed = 0;
  bool low_confidence = false;

  double member_slope(int i) const { return slope(members[i].curve); }
  double s_max() const { return std::max(member_slope(0), member_slope(1)); }
  double s_min() const { return std::min(member_slope(0), member_slope(1)); }
  double ratio() const { return s_min() / s_max(); }
  double observed_slope() const { return slope(group.curve); }
  double observed_benefit() const { return observed_slope() / s_max(); }
  double wcs_predicted_slope() const { return wcs_slope(member_slope(0), member_slope(1)); }
  double wcs_predicted_benefit() const { return wcs_predicted_slope() / s_max(); }
  int better_member() const { return member_slope(0) >= member_slope(1) ? 0 : 1; }
};

/// Fits one dyad. Timed-out group trials are left out of the dyad table;
/// agreement trials enter it with the shared choice.
inline DyadFit fit_dyad_records(std::span<const TrialRecord> records) {
  if (records.empty()) throw std::invalid_argument("fit: no records");
  DyadFit out;
  out.dyad = records.front().dyad;
  std::array<std::vector<double>, 2> dcs;
  std::array<std::vector<Choice>, 2> choices;
  std::vector<double> group_dc;
  std::vector<Choice> group_choice;
  for (const auto& r : records) {
    if (r.dyad != out.dyad) throw std::invalid_argument("fit_dyad_records: records span several dyads");
    ++out.n_trials;
    for (int i = 0; i < 2; ++i) {
      dcs[i].push_back(r.delta_c());
      choices[i].push_back(r.member_choice(i));
    }
    if (!r.agreed) ++out.n_disagreement;
    if (r.completed_group_phase()) ++out.n_group_completed;
    if (const auto g = r.group_choice()) {
      group_dc.push_back(r.delta_c());
      group_choice.push_back(*g);
    }
  }
  for (int i = 0; i < 2; ++i) {
    out.member_tables[i] = tally_responses(dcs[i], choices[i]);
    out.members[i] = fit_curve(out.member_tables[i]);
  }
  out.group_table = tally_responses(group_dc, group_choice);
  out.group = fit_curve(out.group_table);
  out.low_confidence = out.n_group_completed < kMinDisagreementTrials || !out.group.converged;
  return out;
}

/// Records grouped by dyad id, in ascending id order.
inline std::map<int, std::vector<TrialRecord>> split_by_dyad(std::vector<TrialRecord> records) {
  std::map<int, std::vector<TrialRecord>> out;
  for (auto& r : records) out[r.dyad].push_back(std::move(r));
  return out;
}

}  // namespace hapdec::harness
