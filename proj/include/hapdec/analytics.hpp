#pragma once

// Trajectory- and record-level measures of who leads a coupled decision.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "coupling_sim.hpp"
#include "session.hpp"
#include "stats.hpp"
#include "types.hpp"

namespace hapdec {

/// The member (0 or 1) whose individual choice became the group choice.
inline int leader_of(const TrialRecord& rec) {
  if (rec.agreed) throw NotApplicable("leader_of: agreement trials have no Leader");
  if (!rec.completed_group_phase()) throw NotApplicable("leader_of: group phase timed out");
  const Choice g = rec.group->choice;
  const bool m0 = rec.member_choice(0) == g;
  const bool m1 = rec.member_choice(1) == g;
  if (m0 == m1) throw std::logic_error("leader_of: members did not disagree");
  return m0 ? 0 : 1;
}

inline int follower_of(const TrialRecord& rec) { return 1 - leader_of(rec); }

struct FirstMover {
  std::optional<int> member;  // empty when unpredictable
  bool from_onset_tiebreak = false;
};

/// Member with the smaller individual response time; ties go to the earlier
/// group-phase force onset; a double tie is unpredictable.
inline FirstMover first_mover(const TrialRecord& rec) {
  const double rt0 = rec.members[0].rt;
  const double rt1 = rec.members[1].rt;
  if (rt0 < rt1) return {0, false};
  if (rt1 < rt0) return {1, false};
  if (rec.group) {
    const auto& on = rec.group->onset_time;
    if (on[0] && (!on[1] || *on[0] < *on[1])) return {0, true};
    if (on[1] && (!on[0] || *on[1] < *on[0])) return {1, true};
  }
  return {std::nullopt, false};
}

/// Member whose force comes on first in the coupled phase.
inline std::optional<int> first_onset_member(const TrialRecord& rec) {
  if (!rec.group) return std::nullopt;
  const auto& on = rec.group->onset_time;
  if (on[0] && (!on[1] || *on[0] < *on[1])) return 0;
  if (on[1] && (!on[0] || *on[1] < *on[0])) return 1;
  return std::nullopt;
}

struct Crossing {
  double side = 0.0;  // +1 right (second), -1 left (first)
  double time = 0.0;
  std::size_t step = 0;
  int member = 0;
};

/// Earliest step at which either handle leaves [-x_thresh, x_thresh]. Simultaneous
/// exits go to the handle further out, then to member 0.
inline std::optional<Crossing> first_crossing(const TrajectoryLog& log, double x_thresh) {
  if (!(x_thresh > 0.0 && x_thresh < 1.0)) throw std::invalid_argument("first_crossing: x_thresh must lie in (0, 1)");
  for (std::size_t k = 0; k < log.size(); ++k) {
    const double a0 = std::fabs(log.x1[k]);
    const double a1 = std::fabs(log.x2[k]);
    const bool out0 = a0 > x_thresh;
    const bool out1 = a1 > x_thresh;
    if (!out0 && !out1) continue;
    const int m = (out0 && out1) ? (a1 > a0 ? 1 : 0) : (out0 ? 0 : 1);
    const double x = m == 0 ? log.x1[k] : log.x2[k];
    return Crossing{x > 0.0 ? 1.0 : -1.0, log.time(k), k, m};
  }
  return std::nullopt;
}

inline double peak_force(const TrajectoryLog& log, int member) {
  if (log.empty()) throw NotApplicable("peak_force: empty trajectory");
  double peak = 0.0;
  for (double f : log.f(member)) peak = std::max(peak, std::fabs(f));
  return peak;
}

/// W = (1/N) * sum_{k=1..N} F_k (X_k - X_{k-1}), N = number of steps.
/// The per-step average is kept as written; units are N * normalized position.
inline double mechanical_work(std::span<const double> force, std::span<const double> position) {
  if (force.size() != position.size()) throw std::invalid_argument("mechanical_work: size mismatch");
  if (position.size() < 2) throw NotApplicable("mechanical_work: need at least 2 samples");
  double sum = 0.0;
  for (std::size_t k = 1; k < position.size(); ++k) sum += force[k] * (position[k] - position[k - 1]);
  return sum / static_cast<double>(position.size() - 1);
}

inline double mechanical_work(const TrajectoryLog& log, int member) {
  return mechanical_work(log.f(member), log.x(member));
}

struct VelocityRatios {
  double leader = 0.0;    // VeloL / VeloD
  double follower = 0.0;  // VeloF / VeloD
};

/// VeloL, VeloF: mean |v| of each handle from movement onset up to the first
/// x_thresh crossing. VeloD: mean |v| of the displayed cursor from the crossing
/// until it first reaches the target threshold.
inline std::optional<VelocityRatios> velocity_ratios(const TrialRecord& rec, double x_thresh,
                                                     double target_threshold = 0.95) {
  const int leader = leader_of(rec);
  const TrajectoryLog& log = rec.group->log;
  if (log.empty()) throw NotApplicable("velocity_ratios: trajectory not retained");
  const auto cross = first_crossing(log, x_thresh);
  if (!cross) return std::nullopt;

  std::size_t start = 0;
  while (start < log.size() && log.f1[start] == 0.0 && log.f2[start] == 0.0) ++start;
  if (start > cross->step) return std::nullopt;
  std::size_t end = cross->step + 1;
  while (end < log.size() && std::fabs(log.x_display(end)) < target_threshold) ++end;
  if (end >= log.size()) end = log.size() - 1;
  if (end <= cross->step) return std::nullopt;

  auto mean_abs = [](const std::vector<double>& v, std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t k = a; k <= b; ++k) s += std::fabs(v[k]);
    return s / static_cast<double>(b - a + 1);
  };
  double velo_d = 0.0;
  for (std::size_t k = cross->step + 1; k <= end; ++k) velo_d += std::fabs(log.v_display(k));
  velo_d /= static_cast<double>(end - cross->step);
  if (!(velo_d > 0.0)) return std::nullopt;

  const double velo_l = mean_abs(log.v(leader), start, cross->step);
  const double velo_f = mean_abs(log.v(1 - leader), start, cross->step);
  return VelocityRatios{velo_l / velo_d, velo_f / velo_d};
}

struct VelocityRatioSet {
  std::vector<double> leader;
  std::vector<double> follower;
  std::size_t excluded = 0;
};

inline VelocityRatioSet velocity_ratios(std::span<const TrialRecord> records, double x_thresh,
                                        double target_threshold = 0.95) {
  VelocityRatioSet out;
  for (const auto& r : records) {
    if (!r.completed_group_phase()) continue;
    const auto v = velocity_ratios(r, x_thresh, target_threshold);
    if (!v) {
      ++out.excluded;
      continue;
    }
    out.leader.push_back(v->leader);
    out.follower.push_back(v->follower);
  }
  return out;
}

enum class PredictorKind { first_mover, first_onset, first_crossing, peak_force, mechanical_work, member_one };

inline std::string predictor_name(PredictorKind k) {
  switch (k) {
    case PredictorKind::first_mover: return "first_mover";
    case PredictorKind::first_onset: return "first_onset";
    case PredictorKind::first_crossing: return "first_crossing";
    case PredictorKind::peak_force: return "peak_force";
    case PredictorKind::mechanical_work: return "mechanical_work";
    case PredictorKind::member_one: return "member_one";
  }
  return "?";
}

struct Predictor {
  PredictorKind kind = PredictorKind::first_mover;
  double x_thresh = 0.05;  // first_crossing only
};

struct PredictorScore {
  std::size_t hits = 0;
  std::size_t n = 0;
  std::size_t excluded = 0;  // completed trials where the predictor made no call

  double accuracy() const {
    if (n == 0) throw NotApplicable("predictor accuracy: no applicable trials");
    return 100.0 * static_cast<double>(hits) / static_cast<double>(n);
  }
  PredictorScore& operator+=(const PredictorScore& o) {
    hits += o.hits;
    n += o.n;
    excluded += o.excluded;
    return *this;
  }
};

namespace detail {

inline std::optional<int> larger_member(double a, double b) {
  if (a > b) return 0;
  if (b > a) return 1;
  return std::nullopt;
}

}  // namespace detail

/// Whether the predictor identifies the group choice on one completed disagreement
/// trial; empty when it makes no call.
inline std::optional<bool> predictor_hit(const TrialRecord& rec, const Predictor& p) {
  const int leader = leader_of(rec);
  const TrajectoryLog& log = rec.group->log;
  auto needs_log = [&] {
    if (log.empty()) throw NotApplicable("predictor needs the group trajectory");
  };
  std::optional<int> member;
  switch (p.kind) {
    case PredictorKind::first_mover: member = first_mover(rec).member; break;
    case PredictorKind::first_onset: member = first_onset_member(rec); break;
    case PredictorKind::member_one: member = 0; break;
    case PredictorKind::peak_force:
      needs_log();
      member = detail::larger_member(peak_force(log, 0), peak_force(log, 1));
      break;
    case PredictorKind::mechanical_work:
      needs_log();
      member = detail::larger_member(mechanical_work(log, 0), mechanical_work(log, 1));
      break;
    case PredictorKind::first_crossing: {
      needs_log();
      const auto c = first_crossing(log, p.x_thresh);
      if (!c) return std::nullopt;
      return choice_from_side(c->side) == rec.group->choice;
    }
  }
  if (!member) return std::nullopt;
  return *member == leader;
}

inline PredictorScore predictor_score(std::span<const TrialRecord> records, const Predictor& p) {
  PredictorScore s;
  for (const auto& r : records) {
    if (!r.completed_group_phase()) continue;
    const auto hit = predictor_hit(r, p);
    if (!hit) {
      ++s.excluded;
      continue;
    }
    ++s.n;
    if (*hit) ++s.hits;
  }
  return s;
}

/// Percentage of completed group trials whose choice the predictor gets right.
inline double predictor_accuracy(std::span<const TrialRecord> records, const Predictor& p) {
  return predictor_score(records, p).accuracy();
}

struct SampleSummary {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t n = 0;
};

inline std::optional<SampleSummary> summarize(std::span<const double> xs) {
  if (xs.empty()) return std::nullopt;
  SampleSummary s;
  s.n = xs.size();
  s.mean = stats::mean(xs);
  s.stddev = xs.size() > 1 ? std::sqrt(stats::variance(xs)) : 0.0;
  return s;
}

struct TimeSamples {
  std::vector<double> individual_rt;
  std::vector<double> group_time;
  std::vector<double> individual_initiation;
  std::vector<double> group_initiation;
};

struct TimeSummary {
  std::optional<SampleSummary> individual;
  std::optional<SampleSummary> group;  // empty when there are no completed group trials
  std::optional<SampleSummary> individual_initiation;
  std::optional<SampleSummary> group_initiation;
  double x_thresh = 0.05;
};

/// Group initiation time at x_thresh: from the trajectory when available,
/// otherwise the simulator's own record (taken at its configured threshold).
inline std::optional<double> group_initiation_time(const GroupOutcome& g, double x_thresh) {
  if (!g.log.empty()) {
    const auto c = first_crossing(g.log, x_thresh);
    return c ? std::optional<double>(c->time) : std::nullopt;
  }
  return g.initiation_time;
}

inline TimeSamples collect_times(std::span<const TrialRecord> records, double x_thresh = 0.05) {
  TimeSamples s;
  for (const auto& r : records) {
    for (const auto& m : r.members) {
      s.individual_rt.push_back(m.rt);
      if (m.initiation_time) s.individual_initiation.push_back(*m.initiation_time);
    }
    if (r.completed_group_phase()) {
      s.group_time.push_back(r.group->decision_time);
      if (const auto gi = group_initiation_time(*r.group, x_thresh)) s.group_initiation.push_back(*gi);
    }
  }
  return s;
}

inline TimeSummary decision_time_summary(std::span<const TrialRecord> records, double x_thresh = 0.05) {
  const TimeSamples s = collect_times(records, x_thresh);
  TimeSummary out;
  out.x_thresh = x_thresh;
  out.individual = summarize(s.individual_rt);
  out.group = summarize(s.group_time);
  out.individual_initiation = summarize(s.individual_initiation);
  out.group_initiation = summarize(s.group_initiation);
  return out;
}

/// Per-trial leadership measures for completed disagreement trials.
struct LeadershipRow {
  int dyad = 0;
  int block = 0;
  int trial = 0;
  int leader = 0;
  std::optional<int> first_mover;
  double peak_leader = 0.0;
  double peak_follower = 0.0;
  double work_leader = 0.0;
  double work_follower = 0.0;
  std::optional<Crossing> crossing;
  std::optional<VelocityRatios> velocity;
  double decision_time = 0.0;
};

inline LeadershipRow leadership_row(const TrialRecord& r, double x_thresh, double target_threshold = 0.95) {
  LeadershipRow row;
  row.dyad = r.dyad;
  row.block = r.spec.block_index;
  row.trial = r.spec.trial_index;
  row.leader = leader_of(r);
  const int f = 1 - row.leader;
  const auto& log = r.group->log;
  row.first_mover = first_mover(r).member;
  row.peak_leader = peak_force(log, row.leader);
  row.peak_follower = peak_force(log, f);
  row.work_leader = mechanical_work(log, row.leader);
  row.work_follower = mechanical_work(log, f);
  row.crossing = first_crossing(log, x_thresh);
  row.velocity = velocity_ratios(r, x_thresh, target_threshold);
  row.decision_time = r.group->decision_time;
  return row;
}

inline std::vector<LeadershipRow> leadership_table(std::span<const TrialRecord> records, double x_thresh,
                                                   double target_threshold = 0.95) {
  std::vector<LeadershipRow> rows;
  for (const auto& r : records)
    if (r.completed_group_phase()) rows.push_back(leadership_row(r, x_thresh, target_threshold));
  return rows;
}

}  // namespace hapdec
