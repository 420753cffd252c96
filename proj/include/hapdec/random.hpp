#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace hapdec {

using Rng = std::mt19937_64;

/// Independent stream for (master seed, counter...) tuples. The mapping is
/// fixed so that a trial's stream never depends on scheduling or worker count.
inline Rng derive_rng(std::uint64_t master_seed, std::initializer_list<std::uint64_t> counters) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * counters.size());
  words.push_back(static_cast<std::uint32_t>(master_seed));
  words.push_back(static_cast<std::uint32_t>(master_seed >> 32));
  for (std::uint64_t c : counters) {
    words.push_back(static_cast<std::uint32_t>(c));
    words.push_back(static_cast<std::uint32_t>(c >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

/// Fair coin.
inline bool coin_flip(Rng& rng) { return std::bernoulli_distribution(0.5)(rng); }

}  // namespace hapdec
