#pragma once

// File formats: response tables, trial lists, trajectories and trial records as
// CSV; fits, dyad predictions and statistics as JSON.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "../analytics.hpp"
#include "../group_models.hpp"
#include "../psychometrics.hpp"
#include "../session.hpp"
#include "../stats.hpp"
#include "../trials.hpp"
#include "csv.hpp"

namespace hapdec::io {

using nlohmann::json;

// ---- response tables --------------------------------------------------------

inline void write_response_table(const std::string& path, const ResponseTable& table) {
  CsvWriter w(path, {"delta_c", "n_trials", "n_second"});
  for (const auto& r : table.rows())
    w.row({format_double(r.level), std::to_string(r.trials), std::to_string(r.second_chosen)});
}

inline ResponseTable read_response_table(const std::string& path) {
  const auto t = CsvTable::read(path);
  std::vector<ResponseTable::Row> rows;
  for (std::size_t i = 0; i < t.size(); ++i)
    rows.push_back({t.number(i, "delta_c"), static_cast<int>(t.integer(i, "n_trials")),
                    static_cast<int>(t.integer(i, "n_second"))});
  return ResponseTable(std::move(rows));
}

// ---- JSON objects -------------------------------------------------------------

inline json to_json(const FitResult& f) {
  return {{"b", f.curve.bias()},
          {"sigma", f.curve.sigma()},
          {"slope", slope(f.curve)},
          {"sse", f.sse},
          {"converged", f.converged}};
}

inline json to_json(const DyadPrediction& p) {
  const PsychCurve& c = p.summary_curve();
  json j{{"model", std::string(to_string(p.model))}, {"b", c.bias()}, {"sigma", c.sigma()}, {"slope", slope(c)}};
  if (p.model == GroupModel::cf) {
    json samples = json::array();
    for (double l : canonical_levels()) samples.push_back({{"delta_c", l}, {"p", p.probability(l)}});
    j["probabilities"] = samples;
  }
  return j;
}

inline json to_json(const stats::TTestResult& r) {
  return {{"t", r.t}, {"df", r.df}, {"p", r.p}, {"mean_diff", r.mean_diff},
          {"flavor", std::string(stats::to_string(r.flavor))}};
}

inline json to_json(const stats::RegressionResult& r) {
  return {{"slope", r.slope},
          {"intercept", r.intercept},
          {"slope_se", r.slope_se},
          {"intercept_se", r.intercept_se},
          {"r_squared", r.r_squared},
          {"f_stat", r.f_stat},
          {"df", {r.df[0], r.df[1]}},
          {"ci95_slope", {r.ci95_slope[0], r.ci95_slope[1]}},
          {"ci95_intercept", {r.ci95_intercept[0], r.ci95_intercept[1]}}};
}

inline json to_json(const SampleSummary& s) { return {{"mean", s.mean}, {"std", s.stddev}, {"n", s.n}}; }

// ---- trial lists ----------------------------------------------------------------

inline const std::vector<std::string>& trial_list_header() {
  static const std::vector<std::string> h{"block", "trial", "interval", "contrast", "position", "delta_c"};
  return h;
}

inline void write_trial_list(const std::string& path, const std::vector<TrialSpec>& trials) {
  CsvWriter w(path, trial_list_header());
  for (const auto& t : trials)
    w.row({std::to_string(t.block_index), std::to_string(t.trial_index), std::to_string(t.oddball_interval),
           format_double(t.oddball_contrast), std::to_string(t.oddball_position), format_double(delta_contrast(t))});
}

inline std::vector<TrialSpec> read_trial_list(const std::string& path) {
  const auto t = CsvTable::read(path);
  std::vector<TrialSpec> out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    TrialSpec s;
    s.block_index = static_cast<int>(t.integer(i, "block"));
    s.trial_index = static_cast<int>(t.integer(i, "trial"));
    s.oddball_interval = static_cast<int>(t.integer(i, "interval"));
    s.oddball_contrast = t.number(i, "contrast");
    s.oddball_position = static_cast<int>(t.integer(i, "position"));
    out.push_back(s);
  }
  return out;
}

// ---- trajectories -----------------------------------------------------------------

inline std::string trajectory_file_name(int dyad, int block, int trial) {
  return "dyad" + std::to_string(dyad) + "_block" + std::to_string(block) + "_trial" + std::to_string(trial) + ".csv";
}

inline void write_trajectory(const std::string& path, const TrajectoryLog& log) {
  CsvWriter w(path, {"t", "x1", "x2", "v1", "v2", "f1", "f2", "fc1", "fc2", "x_display"});
  for (std::size_t k = 0; k < log.size(); ++k)
    w.row({format_double(log.time(k)), format_double(log.x1[k]), format_double(log.x2[k]), format_double(log.v1[k]),
           format_double(log.v2[k]), format_double(log.f1[k]), format_double(log.f2[k]), format_double(log.fc1[k]),
           format_double(log.fc2[k]), format_double(log.x_display(k))});
}

inline TrajectoryLog read_trajectory(const std::string& path, double dt) {
  const auto t = CsvTable::read(path);
  TrajectoryLog log;
  log.dt = dt;
  log.reserve(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    log.x1.push_back(t.number(i, "x1"));
    log.x2.push_back(t.number(i, "x2"));
    log.v1.push_back(t.number(i, "v1"));
    log.v2.push_back(t.number(i, "v2"));
    log.f1.push_back(t.number(i, "f1"));
    log.f2.push_back(t.number(i, "f2"));
    log.fc1.push_back(t.number(i, "fc1"));
    log.fc2.push_back(t.number(i, "fc2"));
  }
  return log;
}

// ---- trial records ----------------------------------------------------------------

inline const std::vector<std::string>& record_header() {
  static const std::vector<std::string> h{
      "dyad",   "block",  "trial",  "interval", "contrast", "position", "delta_c",         "correct",
      "x1",     "conf1",  "choice1", "rt1",     "init1",    "x2",       "conf2",           "choice2",
      "rt2",    "init2",  "agreed", "group_choice", "group_completed", "group_time", "group_init",
      "onset1", "onset2", "yield1", "yield2",   "max_gap",  "config_hash"};
  return h;
}

inline std::vector<std::string> record_fields(const TrialRecord& r, const std::string& config_hash) {
  const auto& m = r.members;
  std::vector<std::string> f{std::to_string(r.dyad),
                             std::to_string(r.spec.block_index),
                             std::to_string(r.spec.trial_index),
                             std::to_string(r.spec.oddball_interval),
                             format_double(r.spec.oddball_contrast),
                             std::to_string(r.spec.oddball_position),
                             format_double(r.delta_c()),
                             std::to_string(to_int(r.correct))};
  for (int i = 0; i < 2; ++i) {
    f.push_back(format_double(m[i].percept.x));
    f.push_back(format_double(m[i].percept.confidence));
    f.push_back(std::to_string(to_int(m[i].choice())));
    f.push_back(format_double(m[i].rt));
    f.push_back(format_optional(m[i].initiation_time));
  }
  f.push_back(r.agreed ? "1" : "0");
  const auto g = r.group_choice();
  f.push_back(g ? std::to_string(to_int(*g)) : std::string());
  if (r.group) {
    const auto& go = *r.group;
    f.push_back(go.completed ? "1" : "0");
    f.push_back(format_double(go.decision_time));
    f.push_back(format_optional(go.initiation_time));
    f.push_back(format_optional(go.onset_time[0]));
    f.push_back(format_optional(go.onset_time[1]));
    f.push_back(format_optional(go.yielded_at[0]));
    f.push_back(format_optional(go.yielded_at[1]));
    f.push_back(format_double(go.max_gap));
  } else {
    for (int i = 0; i < 8; ++i) f.emplace_back();
  }
  f.push_back(config_hash);
  return f;
}

struct LoadedRecords {
  std::vector<TrialRecord> records;
  std::vector<std::string> config_hashes;  // one per record
};

/// Reads records.csv. Group trajectories are left empty; see load_trajectories.
inline LoadedRecords read_records(const std::string& path) {
  const auto t = CsvTable::read(path);
  for (const auto& col : record_header())
    if (!t.has(col)) throw std::invalid_argument("records: missing column '" + col + "' in " + path);
  LoadedRecords out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    TrialRecord r;
    r.dyad = static_cast<int>(t.integer(i, "dyad"));
    r.spec.block_index = static_cast<int>(t.integer(i, "block"));
    r.spec.trial_index = static_cast<int>(t.integer(i, "trial"));
    r.spec.oddball_interval = static_cast<int>(t.integer(i, "interval"));
    r.spec.oddball_contrast = t.number(i, "contrast");
    r.spec.oddball_position = static_cast<int>(t.integer(i, "position"));
    r.correct = choice_from_int(static_cast<int>(t.integer(i, "correct")));
    for (int m = 0; m < 2; ++m) {
      const std::string n = std::to_string(m + 1);
      auto& mr = r.members[m];
      mr.percept.x = t.number(i, "x" + n);
      mr.percept.confidence = t.number(i, "conf" + n);
      mr.percept.choice = choice_from_int(static_cast<int>(t.integer(i, "choice" + n)));
      mr.rt = t.number(i, "rt" + n);
      mr.initiation_time = t.optional_number(i, "init" + n);
      mr.completed = true;
    }
    r.agreed = t.integer(i, "agreed") != 0;
    if (r.agreed != (r.member_choice(0) == r.member_choice(1)))
      throw std::invalid_argument("records: row " + std::to_string(i + 1) + " has an inconsistent agreed flag");
    if (!r.agreed) {
      GroupOutcome g;
      g.completed = t.integer(i, "group_completed") != 0;
      g.decision_time = t.number(i, "group_time");
      const auto& gc = t.at(i, "group_choice");
      if (g.completed) g.choice = choice_from_int(static_cast<int>(parse_int(gc)));
      g.initiation_time = t.optional_number(i, "group_init");
      g.onset_time = {t.optional_number(i, "onset1"), t.optional_number(i, "onset2")};
      g.yielded_at = {t.optional_number(i, "yield1"), t.optional_number(i, "yield2")};
      g.max_gap = t.number(i, "max_gap");
      r.group = std::move(g);
    }
    out.records.push_back(std::move(r));
    out.config_hashes.push_back(t.at(i, "config_hash"));
  }
  return out;
}

/// Attaches group-phase trajectories from `dir` to the records that have one.
inline void load_trajectories(std::vector<TrialRecord>& records, const std::filesystem::path& dir, double dt) {
  for (auto& r : records) {
    if (!r.group) continue;
    const auto p = dir / trajectory_file_name(r.dyad, r.spec.block_index, r.spec.trial_index);
    if (!std::filesystem::exists(p)) throw std::runtime_error("missing trajectory file " + p.string());
    r.group->log = read_trajectory(p.string(), dt);
  }
}

}  // namespace hapdec::io
