#pragma once

// Trial records and the full session pipeline:
// generate_block -> perceive -> individual phase -> agreement check -> group phase.

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "agents.hpp"
#include "coupling_sim.hpp"
#include "random.hpp"
#include "trials.hpp"
#include "types.hpp"

namespace hapdec {

struct MemberRecord {
  Percept percept;
  double rt = 0.0;
  std::optional<double> initiation_time;
  bool completed = true;

  Choice choice() const { return percept.choice; }
};

struct TrialRecord {
  int dyad = 0;
  TrialSpec spec;
  std::array<MemberRecord, 2> members;
  bool agreed = true;
  std::optional<GroupOutcome> group;  // present iff !agreed
  Choice correct = Choice::first;

  double delta_c() const { return delta_contrast(spec); }
  Choice member_choice(int i) const { return members[i].choice(); }
  bool member_correct(int i) const { return member_choice(i) == correct; }

  /// Agreed choice, or the completed group-phase choice; empty after a timeout.
  std::optional<Choice> group_choice() const {
    if (agreed) return member_choice(0);
    if (group && group->completed) return group->choice;
    return std::nullopt;
  }
  bool group_correct() const {
    const auto g = group_choice();
    return g && *g == correct;
  }
  bool completed_group_phase() const { return !agreed && group && group->completed; }
};

struct SessionOptions {
  int dyad_id = 0;
  int workers = 1;
  bool keep_logs = true;
};

/// Simulates one trial. All randomness comes from streams derived from
/// (master_seed, dyad, block, trial) so the result does not depend on the order
/// in which trials are run.
inline TrialRecord simulate_trial(const std::array<AgentProfile, 2>& dyad, const TrialSpec& spec,
                                  const CouplingConfig& cfg, std::uint64_t master_seed, int dyad_id,
                                  bool keep_logs) {
  const auto d = static_cast<std::uint64_t>(dyad_id);
  const auto b = static_cast<std::uint64_t>(spec.block_index);
  const auto t = static_cast<std::uint64_t>(spec.trial_index);
  Rng trial_rng = derive_rng(master_seed, {d, b, t, 0});
  std::array<Rng, 2> member_rng{derive_rng(master_seed, {d, b, t, 1, dyad[0].seed}),
                                derive_rng(master_seed, {d, b, t, 2, dyad[1].seed})};

  TrialRecord rec;
  rec.dyad = dyad_id;
  rec.spec = spec;
  rec.correct = spec.oddball_interval == 2 ? Choice::second : Choice::first;
  const double dc = delta_contrast(spec);

  std::array<Percept, 2> percepts{};
  for (int i = 0; i < 2; ++i) {
    percepts[i] = perceive(dyad[i], dc, member_rng[i]);
    const IndividualOutcome ind = simulate_individual_trial(dyad[i], percepts[i], cfg, member_rng[i], false);
    rec.members[i].percept = percepts[i];
    rec.members[i].rt = ind.rt;
    rec.members[i].initiation_time = ind.initiation_time;
    rec.members[i].completed = ind.completed;
  }
  rec.agreed = percepts[0].choice == percepts[1].choice;
  if (!rec.agreed) rec.group = simulate_group_trial(dyad, percepts, cfg, trial_rng, keep_logs);
  return rec;
}

inline std::vector<TrialRecord> run_session(const std::array<AgentProfile, 2>& dyad, int n_blocks,
                                            const CouplingConfig& cfg, std::uint64_t master_seed,
                                            const SessionOptions& opts = {}) {
  if (n_blocks < 1) throw std::invalid_argument("run_session: n_blocks must be >= 1");
  for (const auto& a : dyad) a.validate();
  cfg.validate();

  std::vector<TrialSpec> specs;
  specs.reserve(static_cast<std::size_t>(n_blocks) * kTrialsPerBlock);
  for (int block = 1; block <= n_blocks; ++block) {
    Rng block_rng = derive_rng(master_seed, {static_cast<std::uint64_t>(opts.dyad_id),
                                             static_cast<std::uint64_t>(block), 0, 0xB10C});
    auto trials = generate_block(block, block_rng);
    specs.insert(specs.end(), trials.begin(), trials.end());
  }

  std::vector<TrialRecord> records(specs.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr err;
  auto work = [&] {
    try {
      for (std::size_t i = next++; i < specs.size(); i = next++)
        records[i] = simulate_trial(dyad, specs[i], cfg, master_seed, opts.dyad_id, opts.keep_logs);
    } catch (...) {
      std::lock_guard lock(err_mutex);
      if (!err) err = std::current_exception();
      next = specs.size();
    }
  };
  const int workers = std::max(1, opts.workers);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (err) std::rethrow_exception(err);
  return records;
}

}  // namespace hapdec
