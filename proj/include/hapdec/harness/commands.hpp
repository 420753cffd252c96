#pragma once

// The five toolkit commands. Each reads and writes plain files so that every
// output can be regenerated byte-for-byte from (config, seed).

#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "../analytics.hpp"
#include "../group_models.hpp"
#include "../io/serialize.hpp"
#include "../session.hpp"
#include "../stats.hpp"
#include "config.hpp"
#include "dyad_fit.hpp"

namespace hapdec::harness {

namespace fs = std::filesystem;

// ---- simulate -------------------------------------------------------------------

struct SimulateOptions {
  std::optional<fs::path> out_dir;  // overrides config.output_dir
  int workers = 1;
  bool write_trajectories = true;
};

struct SimulateSummary {
  fs::path out_dir;
  std::size_t n_records = 0;
  std::size_t n_trajectories = 0;
  std::string config_hash;
};

inline void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory '" + dir.string() + "'");
}

inline SimulateSummary cmd_simulate(const SessionConfig& cfg, const SimulateOptions& opts = {}) {
  SimulateSummary out;
  out.out_dir = opts.out_dir ? *opts.out_dir : fs::path(cfg.output_dir);
  if (out.out_dir.empty()) throw ConfigError("simulate: no output directory (use --out or output_dir)");
  out.config_hash = config_hash(cfg);
  ensure_directory(out.out_dir);
  const fs::path traj_dir = out.out_dir / "trajectories";
  if (opts.write_trajectories) ensure_directory(traj_dir);

  io::CsvWriter records((out.out_dir / "records.csv").string(), io::record_header());
  for (std::size_t d = 0; d < cfg.dyads.size(); ++d) {
    const int dyad_id = static_cast<int>(d) + 1;
    const std::array<AgentProfile, 2> dyad{cfg.dyads[d].member_a, cfg.dyads[d].member_b};
    const auto recs = run_session(dyad, cfg.n_blocks, cfg.coupling, cfg.master_seed,
                                  {dyad_id, opts.workers, opts.write_trajectories});
    for (const auto& r : recs) {
      records.row(io::record_fields(r, out.config_hash));
      ++out.n_records;
      if (opts.write_trajectories && r.group) {
        io::write_trajectory(
            (traj_dir / io::trajectory_file_name(r.dyad, r.spec.block_index, r.spec.trial_index)).string(),
            r.group->log);
        ++out.n_trajectories;
      }
    }
  }
  write_json_file(out.out_dir / "manifest.json", manifest_json(cfg));
  return out;
}

// ---- fit ----------------------------------------------------------------------------

inline json dyad_fit_json(const DyadFit& f) {
  json preds = json::object();
  for (GroupModel m : {GroupModel::wcs, GroupModel::cf, GroupModel::bf, GroupModel::dss})
    preds[std::string(to_string(m))] = io::to_json(predict_dyad(m, f.members[0].curve, f.members[1].curve));
  return {{"dyad", f.dyad},
          {"n_trials", f.n_trials},
          {"n_disagreement", f.n_disagreement},
          {"n_group_completed", f.n_group_completed},
          {"member_a", io::to_json(f.members[0])},
          {"member_b", io::to_json(f.members[1])},
          {"dyad_fit", io::to_json(f.group)},
          {"low_confidence", f.low_confidence},
          {"ratio", f.ratio()},
          {"observed_benefit", f.observed_benefit()},
          {"wcs_predicted_benefit", f.wcs_predicted_benefit()},
          {"predictions", preds}};
}

struct FitOptionsCli {
  bool per_block = false;
  std::optional<fs::path> out;  // default: fits.json next to the records
};

inline json cmd_fit(const fs::path& records_path, const FitOptionsCli& opts = {}) {
  auto loaded = io::read_records(records_path.string());
  if (loaded.records.empty()) throw std::invalid_argument("fit: '" + records_path.string() + "' holds no records");
  json dyads = json::array();
  for (const auto& [id, recs] : split_by_dyad(std::move(loaded.records))) {
    json entry = dyad_fit_json(fit_dyad_records(recs));
    if (opts.per_block) {
      std::map<int, std::vector<TrialRecord>> blocks;
      for (const auto& r : recs) blocks[r.spec.block_index].push_back(r);
      json per_block = json::array();
      for (const auto& [b, brecs] : blocks) {
        const DyadFit bf = fit_dyad_records(brecs);
        per_block.push_back({{"block", b},
                             {"member_a", io::to_json(bf.members[0])},
                             {"member_b", io::to_json(bf.members[1])},
                             {"dyad_fit", io::to_json(bf.group)},
                             {"low_confidence", true}});
      }
      entry["per_block"] = per_block;
    }
    dyads.push_back(entry);
  }
  json out{{"canonical", "pooled over blocks"}, {"dyads", dyads}};
  write_json_file(opts.out ? *opts.out : records_path.parent_path() / "fits.json", out);
  return out;
}

// ---- analyze ------------------------------------------------------------------------

/// Human values reported for the original experiment; written next to the
/// simulated numbers for orientation only.
namespace reference {
inline const std::map<std::string, std::string>& predictor_values() {
  static const std::map<std::string, std::string> v{
      {"first_mover", "66.5"}, {"peak_force", "71.7"}, {"mechanical_work", "69"}};
  return v;
}
inline std::string first_crossing(double thr) {
  static const std::map<double, std::string> v{{0.05, "88.5"}, {0.08, "90.0"}, {0.10, "91.9"}, {0.15, "92.9"},
                                               {0.20, "93.7"}, {0.25, "94.6"}, {0.30, "95.7"}};
  for (const auto& [t, s] : v)
    if (std::fabs(t - thr) < 1e-12) return s;
  return "";
}
}  // namespace reference

namespace detail {

/// Runs a statistic, turning "not enough data" into a null with a reason.
inline json guarded(const std::function<json()>& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    return {{"unavailable", e.what()}};
  } catch (const NotApplicable& e) {
    return {{"unavailable", e.what()}};
  }
}

inline json summary_json(std::span<const double> xs) {
  const auto s = summarize(xs);
  return s ? io::to_json(*s) : json(nullptr);
}

inline json two_sample_json(std::span<const double> a, std::span<const double> b) {
  return {{"pooled", guarded([&] { return io::to_json(stats::t_test_two_sample(a, b, stats::TTestFlavor::pooled)); })},
          {"welch", guarded([&] { return io::to_json(stats::t_test_two_sample(a, b, stats::TTestFlavor::welch)); })}};
}

}  // namespace detail

struct AnalyzeOptions {
  std::optional<std::vector<double>> thresholds;  // default: from the manifest
  std::optional<fs::path> out_dir;                // default: next to the records
};

inline void require_matching_hashes(const std::vector<std::string>& hashes, const Manifest& m) {
  for (std::size_t i = 0; i < hashes.size(); ++i)
    if (hashes[i] != m.config_hash)
      throw ConfigError("records row " + std::to_string(i + 1) + " carries config hash " + hashes[i] +
                        " but the manifest says " + m.config_hash + " (mixed cohorts?)");
}

inline json cmd_analyze(const fs::path& records_path, const AnalyzeOptions& opts = {}) {
  const fs::path dir = records_path.parent_path();
  const Manifest manifest = load_manifest(dir / "manifest.json");
  auto loaded = io::read_records(records_path.string());
  if (loaded.records.empty()) throw std::invalid_argument("analyze: no records");
  require_matching_hashes(loaded.config_hashes, manifest);
  const auto thresholds = opts.thresholds ? *opts.thresholds : manifest.config.thresholds;
  for (double t : thresholds)
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("analyze: thresholds must lie in (0, 1)");
  const CouplingConfig& cc = manifest.config.coupling;
  const fs::path out_dir = opts.out_dir ? *opts.out_dir : dir;
  ensure_directory(out_dir);

  std::vector<Predictor> predictors;
  for (auto k : {PredictorKind::first_mover, PredictorKind::first_onset, PredictorKind::peak_force,
                 PredictorKind::mechanical_work, PredictorKind::member_one})
    predictors.push_back({k, cc.x_thresh});
  for (double t : thresholds) predictors.push_back({PredictorKind::first_crossing, t});
  std::vector<PredictorScore> scores(predictors.size());

  io::CsvWriter lead((out_dir / "leadership.csv").string(),
                     {"dyad", "block", "trial", "leader", "first_mover", "peak_leader_n", "peak_follower_n",
                      "work_leader", "work_follower", "crossing_side", "crossing_time_s", "velo_l_ratio",
                      "velo_f_ratio", "decision_time_s"});
  std::vector<double> peak_l, peak_f, work_l, work_f, velo_l, velo_f, velo_diff;
  std::size_t velo_excluded = 0;
  TimeSamples times;
  std::size_t n_disagreement = 0, n_completed = 0;

  for (auto& [id, recs] : split_by_dyad(std::move(loaded.records))) {
    io::load_trajectories(recs, dir / "trajectories", cc.dt);
    for (std::size_t p = 0; p < predictors.size(); ++p) scores[p] += predictor_score(recs, predictors[p]);
    for (const auto& row : leadership_table(recs, cc.x_thresh, cc.target_threshold)) {
      lead.row({std::to_string(row.dyad), std::to_string(row.block), std::to_string(row.trial),
                std::to_string(row.leader + 1), row.first_mover ? std::to_string(*row.first_mover + 1) : "",
                io::format_double(row.peak_leader), io::format_double(row.peak_follower),
                io::format_double(row.work_leader), io::format_double(row.work_follower),
                row.crossing ? std::to_string(static_cast<int>(row.crossing->side)) : "",
                row.crossing ? io::format_double(row.crossing->time) : "",
                row.velocity ? io::format_double(row.velocity->leader) : "",
                row.velocity ? io::format_double(row.velocity->follower) : "",
                io::format_double(row.decision_time)});
      peak_l.push_back(row.peak_leader);
      peak_f.push_back(row.peak_follower);
      work_l.push_back(row.work_leader);
      work_f.push_back(row.work_follower);
      if (row.velocity) {
        velo_l.push_back(row.velocity->leader);
        velo_f.push_back(row.velocity->follower);
        velo_diff.push_back(std::fabs(row.velocity->leader - 1.0) - std::fabs(row.velocity->follower - 1.0));
      } else {
        ++velo_excluded;
      }
    }
    const TimeSamples t = collect_times(recs, cc.x_thresh);
    for (auto [dst, src] : {std::pair{&times.individual_rt, &t.individual_rt}, {&times.group_time, &t.group_time},
                            {&times.individual_initiation, &t.individual_initiation},
                            {&times.group_initiation, &t.group_initiation}})
      dst->insert(dst->end(), src->begin(), src->end());
    for (const auto& r : recs) {
      n_disagreement += !r.agreed;
      n_completed += r.completed_group_phase();
    }
    for (auto& r : recs)
      if (r.group) r.group->log = {};
  }

  {
    io::CsvWriter w((out_dir / "predictors.csv").string(),
                    {"predictor", "threshold", "accuracy", "n", "excluded", "reference_human_value"});
    for (std::size_t p = 0; p < predictors.size(); ++p) {
      const bool fc = predictors[p].kind == PredictorKind::first_crossing;
      const std::string name = predictor_name(predictors[p].kind);
      std::string ref;
      if (fc) {
        ref = reference::first_crossing(predictors[p].x_thresh);
      } else if (auto it = reference::predictor_values().find(name); it != reference::predictor_values().end()) {
        ref = it->second;
      }
      w.row({name, fc ? io::format_double(predictors[p].x_thresh) : "",
             scores[p].n ? io::format_double(scores[p].accuracy()) : "", std::to_string(scores[p].n),
             std::to_string(scores[p].excluded), ref});
    }
  }
  {
    io::CsvWriter w((out_dir / "times.csv").string(), {"measure", "mean_s", "std_s", "n", "reference_human_value"});
    auto row = [&](const std::string& name, const std::vector<double>& xs, const std::string& ref) {
      const auto s = summarize(xs);
      w.row({name, s ? io::format_double(s->mean) : "", s ? io::format_double(s->stddev) : "",
             std::to_string(xs.size()), ref});
    };
    row("individual_rt", times.individual_rt, "mean 0.881 s; std 0.788 s");
    row("group_decision_time", times.group_time, "mean 2.856 s; std 2.022 s");
    row("individual_initiation", times.individual_initiation, "");
    row("group_initiation", times.group_initiation, "");
  }

  json s;
  s["n_records"] = loaded.config_hashes.size();
  s["n_disagreement"] = n_disagreement;
  s["n_group_completed"] = n_completed;
  s["config_hash"] = manifest.config_hash;
  s["peak_force"] = {{"leader", detail::summary_json(peak_l)},
                     {"follower", detail::summary_json(peak_f)},
                     {"leader_vs_follower", detail::two_sample_json(peak_l, peak_f)},
                     {"reference_human_value", "Leader 0.75 N vs Follower 0.43 N; t(676)=9.71, p<0.0001"}};
  s["mechanical_work"] = {
      {"leader", detail::summary_json(work_l)},
      {"follower", detail::summary_json(work_f)},
      {"leader_vs_follower", detail::two_sample_json(work_l, work_f)},
      {"follower_vs_zero", detail::guarded([&] { return io::to_json(stats::t_test_one_sample(work_f, 0.0)); })},
      {"reference_human_value", "Leader 0.30 J vs Follower -0.08 J; t(676)=15.7, p<0.0001"}};
  s["decision_time"] = {{"individual_rt", detail::summary_json(times.individual_rt)},
                        {"group", detail::summary_json(times.group_time)},
                        {"group_vs_individual", detail::two_sample_json(times.group_time, times.individual_rt)},
                        {"reference_human_value", "group 2856 ms vs individual 881 ms; t(850, 4352)=-23.84"}};
  s["initiation_time"] = {
      {"x_thresh", cc.x_thresh},
      {"individual", detail::summary_json(times.individual_initiation)},
      {"group", detail::summary_json(times.group_initiation)},
      {"group_vs_individual", detail::two_sample_json(times.group_initiation, times.individual_initiation)}};
  s["velocity_ratio"] = {
      {"leader", detail::summary_json(velo_l)},
      {"follower", detail::summary_json(velo_f)},
      {"excluded", velo_excluded},
      {"leader_vs_follower_paired",
       detail::guarded([&] {
         std::vector<double> d(velo_l.size());
         for (std::size_t i = 0; i < d.size(); ++i) d[i] = velo_l[i] - velo_f[i];
         return io::to_json(stats::t_test_one_sample(d, 0.0));
       })},
      {"distance_from_one_paired", detail::guarded([&] { return io::to_json(stats::t_test_one_sample(velo_diff, 0.0)); })},
      {"reference_human_value", "VeloL/VeloD 1.0788 vs VeloF/VeloD 1.1115; t=-2.92, N=1866"}};
  write_json_file(out_dir / "stats.json", s);
  return s;
}

// ---- sweep ------------------------------------------------------------------------

/// Sensitivity bias applied to the "theory_biased" column (fitted slope and
/// intercept of the human benefit regression).
inline constexpr double kBiasedAlpha = 0.64;
inline constexpr double kBiasedBeta = 0.71;

struct SweepOptions {
  std::vector<double> ratios;
  int trials_per_point = 2000;  // per contrast level, per replicate
  int replicates = 20;
  std::uint64_t seed = 1;
  double sigma_best = 4.0;
  std::optional<fs::path> out;
};

struct SweepRow {
  double ratio = 0.0;
  double theory = 0.0;
  double theory_biased = 0.0;
  double simulated_mean = 0.0;
  double simulated_se = 0.0;
  int replicates = 0;
};

/// Benefit of a replicate is the fitted dyad slope over the fitted slope of
/// the member built as the better one.
inline std::vector<SweepRow> cmd_sweep(const SweepOptions& opts) {
  if (opts.ratios.empty()) throw std::invalid_argument("sweep: empty ratio grid");
  for (double r : opts.ratios)
    if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("sweep: ratios must lie in (0, 1]");
  if (opts.trials_per_point < 1) throw std::invalid_argument("sweep: trials-per-point must be >= 1");
  if (opts.replicates < 2) throw std::invalid_argument("sweep: need at least 2 replicates for error bars");
  if (!(opts.sigma_best > 0.0)) throw std::invalid_argument("sweep: sigma_best must be positive");

  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < opts.ratios.size(); ++i) {
    const double r = opts.ratios[i];
    const PsychCurve best(0.0, opts.sigma_best);
    const PsychCurve worse(0.0, opts.sigma_best / r);
    std::vector<double> benefits;
    for (int rep = 0; rep < opts.replicates; ++rep) {
      Rng rng = derive_rng(opts.seed, {i, static_cast<std::uint64_t>(rep), 0x5EE9});
      const auto t = simulate_dyad_tables(best, worse, canonical_levels(), opts.trials_per_point, rng);
      benefits.push_back(slope(fit_curve(t.group).curve) / slope(fit_curve(t.member1).curve));
    }
    SweepRow row;
    row.ratio = r;
    row.theory = collective_benefit(r);
    row.theory_biased = biased_wcs_benefit(r, kBiasedAlpha, kBiasedBeta);
    row.simulated_mean = stats::mean(benefits);
    row.simulated_se = std::sqrt(stats::variance(benefits) / static_cast<double>(benefits.size()));
    row.replicates = opts.replicates;
    rows.push_back(row);
  }
  if (opts.out) {
    io::CsvWriter w(opts.out->string(),
                    {"ratio", "theory", "theory_biased", "simulated_mean", "simulated_se", "replicates"});
    for (const auto& row : rows)
      w.row({io::format_double(row.ratio), io::format_double(row.theory), io::format_double(row.theory_biased),
             io::format_double(row.simulated_mean), io::format_double(row.simulated_se),
             std::to_string(row.replicates)});
  }
  return rows;
}

// ---- report -----------------------------------------------------------------------

struct ReportOptions {
  std::optional<fs::path> out_dir;  // default: the cohort directory
};

inline json cmd_report(const fs::path& cohort_dir, const ReportOptions& opts = {}) {
  const Manifest manifest = load_manifest(cohort_dir / "manifest.json");
  auto loaded = io::read_records((cohort_dir / "records.csv").string());
  require_matching_hashes(loaded.config_hashes, manifest);
  std::vector<DyadFit> fits;
  for (const auto& [id, recs] : split_by_dyad(std::move(loaded.records))) fits.push_back(fit_dyad_records(recs));
  if (fits.size() < 2) throw std::invalid_argument("report: need at least 2 dyads, cohort has " +
                                                   std::to_string(fits.size()));
  const fs::path out_dir = opts.out_dir ? *opts.out_dir : cohort_dir;
  ensure_directory(out_dir);

  std::vector<double> ratios, observed, predicted, benefits, similar, different;
  {
    io::CsvWriter w((out_dir / "fig3a.csv").string(),
                    {"dyad", "s_a", "s_b", "ratio", "s_dyad_observed", "s_dyad_wcs", "benefit_observed",
                     "benefit_wcs", "low_confidence"});
    for (const auto& f : fits) {
      w.row({std::to_string(f.dyad), io::format_double(f.member_slope(0)), io::format_double(f.member_slope(1)),
             io::format_double(f.ratio()), io::format_double(f.observed_slope()),
             io::format_double(f.wcs_predicted_slope()), io::format_double(f.observed_benefit()),
             io::format_double(f.wcs_predicted_benefit()), f.low_confidence ? "1" : "0"});
      ratios.push_back(f.ratio());
      observed.push_back(f.observed_slope());
      predicted.push_back(f.wcs_predicted_slope());
      benefits.push_back(f.observed_benefit());
      (f.ratio() > benefit_threshold ? similar : different).push_back(f.observed_benefit());
    }
  }
  {
    io::CsvWriter w((out_dir / "fig3b.csv").string(), {"dyad", "ratio", "benefit_observed", "benefit_theory"});
    for (const auto& f : fits)
      w.row({std::to_string(f.dyad), io::format_double(f.ratio()), io::format_double(f.observed_benefit()),
             io::format_double(collective_benefit(f.ratio()))});
  }
  {
    // Mean proportion of "second" choices per level for the worse member, the
    // better member and the dyad, split by similar / different sensitivities.
    io::CsvWriter w((out_dir / "fig2cd.csv").string(),
                    {"group", "delta_c", "worse_mean", "better_mean", "dyad_mean", "n_dyads"});
    for (const bool sim : {true, false}) {
      std::map<double, std::array<double, 3>> sums;
      std::map<double, int> counts;
      for (const auto& f : fits) {
        if ((f.ratio() > benefit_threshold) != sim) continue;
        const int b = f.better_member();
        const std::array<const ResponseTable*, 3> tables{&f.member_tables[1 - b], &f.member_tables[b], &f.group_table};
        for (int k = 0; k < 3; ++k)
          for (std::size_t i = 0; i < tables[k]->size(); ++i) sums[tables[k]->rows()[i].level][k] += tables[k]->proportion(i);
        for (const auto& row : f.group_table.rows()) ++counts[row.level];
      }
      for (const auto& [level, s] : sums) {
        const double n = counts[level];
        if (n == 0) continue;
        w.row({sim ? "similar" : "different", io::format_double(level), io::format_double(s[0] / n),
               io::format_double(s[1] / n), io::format_double(s[2] / n), std::to_string(counts[level])});
      }
    }
  }

  json rep;
  rep["n_dyads"] = fits.size();
  rep["config_hash"] = manifest.config_hash;
  if (fits.size() >= 3) {
    rep["benefit_regression"] = io::to_json(stats::linear_regression(ratios, benefits));
  } else {
    rep["benefit_regression"] = {{"unavailable", "regression needs at least 3 dyads"}};
  }
  rep["benefit_regression_theory"] = {{"slope", std::numbers::sqrt2 / 2.0}, {"intercept", std::numbers::sqrt2 / 2.0}};
  rep["benefit_regression_reference_human_value"] = "slope 0.64 +- 0.13, intercept 0.71";
  rep["similar_benefit_vs_1"] =
      detail::guarded([&] { return io::to_json(stats::t_test_one_sample(similar, 1.0)); });
  rep["different_benefit_vs_1"] =
      detail::guarded([&] { return io::to_json(stats::t_test_one_sample(different, 1.0)); });
  rep["similar_different_reference_human_value"] = "similar t(13)=3.94, p<0.001; different t(4)=-9.89, p<0.0001";
  rep["observed_vs_wcs_paired"] = detail::guarded([&] {
    std::vector<double> d(observed.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = observed[i] - predicted[i];
    return io::to_json(stats::t_test_one_sample(d, 0.0));
  });
  rep["observed_vs_wcs_reference_human_value"] = "t(17)=0.51, p=0.62";
  write_json_file(out_dir / "report.json", rep);
  return rep;
}

}  // namespace hapdec::harness
