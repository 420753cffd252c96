#pragma once

#include <algorithm>
#include <array>
#include <random>
#include <stdexcept>
#include <vector>

#include "random.hpp"

namespace hapdec {

inline constexpr double kBaselineContrast = 10.0;
inline constexpr std::array<double, 4> kOddballContrasts{11.5, 13.5, 17.0, 25.0};
inline constexpr int kTrialsPerBlock = 16;
inline constexpr int kBlocksPerSession = 8;
inline constexpr int kPatchPositions = 6;

// Presentation timing. Recorded for reference only; the simulation works on dC.
inline constexpr double kStimulusDuration_s = 0.085;
inline constexpr double kInterStimulusPause_s = 1.0;

struct TrialSpec {
  int block_index = 1;
  int trial_index = 1;
  int oddball_interval = 1;  // 1 or 2
  double oddball_contrast = kOddballContrasts[0];
  int oddball_position = 1;  // 1..6
  double baseline_contrast = kBaselineContrast;

  friend bool operator==(const TrialSpec&, const TrialSpec&) = default;
};

/// Contrast in the second interval minus contrast in the first.
inline double delta_contrast(const TrialSpec& spec) {
  const double diff = spec.oddball_contrast - spec.baseline_contrast;
  return spec.oddball_interval == 2 ? diff : -diff;
}

/// 16 trials: every (interval, contrast) pair exactly twice, shuffled, with a
/// uniform patch position.
inline std::vector<TrialSpec> generate_block(int block_index, Rng& rng) {
  if (block_index < 1) throw std::invalid_argument("generate_block: block index must be >= 1");
  std::vector<TrialSpec> trials;
  trials.reserve(kTrialsPerBlock);
  for (int rep = 0; rep < 2; ++rep)
    for (int interval : {1, 2})
      for (double contrast : kOddballContrasts) {
        TrialSpec t;
        t.block_index = block_index;
        t.oddball_interval = interval;
        t.oddball_contrast = contrast;
        trials.push_back(t);
      }
  std::shuffle(trials.begin(), trials.end(), rng);
  std::uniform_int_distribution<int> position(1, kPatchPositions);
  for (int i = 0; i < kTrialsPerBlock; ++i) {
    trials[i].trial_index = i + 1;
    trials[i].oddball_position = position(rng);
  }
  return trials;
}

}  // namespace hapdec
