// hapdec: simulate, fit and analyze coupled dyadic decisions.
//
// Exit codes: 0 success, 2 invalid input, 3 runtime failure.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hapdec/harness/commands.hpp"

namespace {

using namespace hapdec;
namespace fs = std::filesystem;

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(io::parse_double(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and analysis toolkit for haptically coupled dyadic decisions"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Run every dyad in a config; write records, trajectories, manifest");
  std::string config_path, out_dir;
  int workers = 1;
  sim->add_option("--config", config_path, "Session config (JSON)")->required();
  sim->add_option("--out", out_dir, "Output directory (overrides output_dir in the config)");
  sim->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  auto* fit = app.add_subcommand("fit", "Fit members and dyads from records.csv");
  std::string records_path, fit_out;
  bool per_block = false;
  fit->add_option("--records", records_path, "records.csv")->required();
  fit->add_option("--out", fit_out, "Output file (default: fits.json next to the records)");
  fit->add_flag("--per-block", per_block, "Also fit each block separately");

  auto* ana = app.add_subcommand("analyze", "Predictors, leadership, timing and test statistics");
  std::string ana_records, ana_out;
  std::vector<double> thresholds;
  ana->add_option("--records", ana_records, "records.csv (manifest.json must sit next to it)")->required();
  ana->add_option("--thresholds", thresholds, "1C thresholds (default: from the config)")->delimiter(',');
  ana->add_option("--out", ana_out, "Output directory (default: next to the records)");

  auto* swp = app.add_subcommand("sweep", "Collective benefit vs sensitivity ratio, theory and simulation");
  std::string ratios, sweep_out = "benefit_curve.csv";
  harness::SweepOptions so;
  swp->add_option("--ratios", ratios, "Comma separated s_min/s_max values in (0, 1]")->required();
  swp->add_option("--trials-per-point", so.trials_per_point, "Trials per contrast level and replicate")->required();
  swp->add_option("--replicates", so.replicates, "Replicates per ratio")->capture_default_str();
  swp->add_option("--seed", so.seed, "Seed")->capture_default_str();
  swp->add_option("--sigma-best", so.sigma_best, "Sigma of the better member (% contrast)")->capture_default_str();
  swp->add_option("--out", sweep_out, "Output CSV")->capture_default_str();

  auto* rep = app.add_subcommand("report", "Figure data for a simulated cohort");
  std::string cohort, rep_out;
  rep->add_option("--cohort", cohort, "Directory written by simulate")->required();
  rep->add_option("--out", rep_out, "Output directory (default: the cohort directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*sim) {
      harness::SimulateOptions opts;
      if (!out_dir.empty()) opts.out_dir = out_dir;
      opts.workers = workers;
      const auto s = harness::cmd_simulate(harness::load_config(config_path), opts);
      std::cout << "wrote " << s.n_records << " records and " << s.n_trajectories << " trajectories to "
                << s.out_dir.string() << " (config " << s.config_hash << ")\n";
    } else if (*fit) {
      harness::FitOptionsCli opts;
      opts.per_block = per_block;
      if (!fit_out.empty()) opts.out = fit_out;
      const auto j = harness::cmd_fit(records_path, opts);
      std::cout << "fitted " << j["dyads"].size() << " dyad(s)\n";
    } else if (*ana) {
      harness::AnalyzeOptions opts;
      if (!thresholds.empty()) opts.thresholds = thresholds;
      if (!ana_out.empty()) opts.out_dir = ana_out;
      const auto j = harness::cmd_analyze(ana_records, opts);
      std::cout << "analyzed " << j["n_records"] << " records (" << j["n_group_completed"]
                << " completed group trials)\n";
    } else if (*swp) {
      so.ratios = parse_list(ratios);
      so.out = sweep_out;
      const auto rows = harness::cmd_sweep(so);
      std::cout << "wrote " << rows.size() << " rows to " << sweep_out << "\n";
    } else if (*rep) {
      harness::ReportOptions opts;
      if (!rep_out.empty()) opts.out_dir = rep_out;
      const auto j = harness::cmd_report(cohort, opts);
      std::cout << "report for " << j["n_dyads"] << " dyads\n";
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NotApplicable& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
