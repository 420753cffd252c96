#pragma once

// Generative observer/actor: one noisy sample of dC per trial, a response time
// that shrinks with confidence, and a force controller for the coupled phase.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

#include "psychometrics.hpp"
#include "random.hpp"
#include "types.hpp"

namespace hapdec {

/// How a contested agent decides to give way.
///  deterministic: yields once the partner has pushed harder than its own
///                 intended force for a full dwell window.
///  stochastic:    at the end of each dwell window of active opposition, yields
///                 with probability partner_conf / (own_conf + partner_conf).
enum class YieldRule { deterministic, stochastic };

/// What a yielded agent does afterwards. Both apply resist_gain * previous magnitude;
/// `resist` pushes back toward the abandoned side, `comply` pushes along.
enum class YieldStyle { resist, comply };

struct AgentProfile {
  double sigma = 4.0;         // % contrast
  double bias_b = 0.0;        // % contrast
  double rt_base = 0.4;       // s
  double rt_gain = 1.0;       // s
  double onset_base = 0.2;    // s
  double onset_gain = 1.0;    // s
  double force_gain = 0.5;    // N per unit confidence
  double f_max = 2.0;         // N
  double yield_dwell = 0.3;   // s
  double resist_gain = 0.3;   // [0, 1]
  std::uint64_t seed = 0;
  YieldRule yield_rule = YieldRule::deterministic;
  YieldStyle yield_style = YieldStyle::resist;

  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw std::invalid_argument(std::string("AgentProfile: ") + what);
    };
    require(sigma > 0.0 && std::isfinite(sigma), "sigma must be positive");
    require(std::isfinite(bias_b), "bias must be finite");
    require(f_max > 0.0 && std::isfinite(f_max), "f_max must be positive");
    require(rt_base >= 0.0 && rt_gain >= 0.0 && onset_base >= 0.0 && onset_gain >= 0.0 &&
                force_gain >= 0.0 && yield_dwell >= 0.0,
            "gains and times must be non-negative");
    require(resist_gain >= 0.0 && resist_gain <= 1.0, "resist_gain must lie in [0, 1]");
  }

  PsychCurve curve() const { return {bias_b, sigma}; }
};

struct Percept {
  double x = 0.0;  // internal decision variable, % contrast
  Choice choice = Choice::first;
  double confidence = 0.0;  // |x| / sigma
  bool tie_broken = false;  // x was exactly 0 and the choice came from a coin
};

inline Percept make_percept(double x, double sigma, Rng& rng) {
  Percept p;
  p.x = x;
  p.confidence = std::fabs(x) / sigma;
  if (x > 0.0) {
    p.choice = Choice::second;
  } else if (x < 0.0) {
    p.choice = Choice::first;
  } else {
    p.tie_broken = true;
    p.choice = coin_flip(rng) ? Choice::second : Choice::first;
  }
  return p;
}

/// x ~ N(dC + b, sigma).
inline Percept perceive(const AgentProfile& profile, double delta_c, Rng& rng) {
  std::normal_distribution<double> noise(delta_c + profile.bias_b, profile.sigma);
  return make_percept(noise(rng), profile.sigma, rng);
}

inline constexpr double kRtLogNoise = 0.2;

/// Noise-free part of the response time.
inline double individual_rt_mode(const Percept& percept, const AgentProfile& profile) {
  return profile.rt_base + profile.rt_gain / (1.0 + percept.confidence);
}

inline double individual_rt(const Percept& percept, const AgentProfile& profile, Rng& rng) {
  std::normal_distribution<double> log_noise(0.0, kRtLogNoise);
  return individual_rt_mode(percept, profile) * std::exp(log_noise(rng));
}

inline double onset_time(const Percept& percept, const AgentProfile& profile) {
  return profile.onset_base + profile.onset_gain / (1.0 + percept.confidence);
}

inline double intended_force(const Percept& percept, const AgentProfile& profile) {
  return std::min(profile.force_gain * percept.confidence, profile.f_max);
}

/// Controller state carried between calls within one group trial.
struct NegotiationState {
  double t = 0.0;                     // s since the coupled phase started
  double partner_force_sensed = 0.0;  // coupling force on own handle, N
  double partner_confidence = 0.0;    // used by the stochastic rule only
  bool opposing = false;  // sustained opposition in progress
  double opposing_since = 0.0;
  std::optional<double> target_side;  // +1 / -1; set from the percept on first use
  bool yielded = false;
  double yielded_at = 0.0;
  double last_force = 0.0;
};

namespace detail {

// Partner's applied force as inferred from the link, assuming the two handles
// move together: f_partner = f_own + 2 * fc_own.
inline double inferred_partner_force(const NegotiationState& s) {
  return s.last_force + 2.0 * s.partner_force_sensed;
}

inline constexpr double kActiveOppositionN = 0.01;

}  // namespace detail

/// Force applied by the agent at time state.t; updates the yield bookkeeping.
inline double negotiation_force(const Percept& percept, const AgentProfile& profile, NegotiationState& state,
                                Rng& rng) {
  if (!state.target_side) state.target_side = side_of(percept.choice);
  const double magnitude = intended_force(percept, profile);
  if (state.t < onset_time(percept, profile)) {
    state.last_force = 0.0;
    return 0.0;
  }

  if (!state.yielded) {
    const double target = *state.target_side;
    bool opposing = false;
    if (profile.yield_rule == YieldRule::deterministic) {
      opposing = state.partner_force_sensed * target < 0.0 && std::fabs(state.partner_force_sensed) > magnitude;
    } else {
      const double partner = detail::inferred_partner_force(state);
      opposing = partner * target < 0.0 && std::fabs(partner) > detail::kActiveOppositionN;
    }

    if (!opposing) {
      state.opposing = false;
    } else if (!state.opposing) {
      state.opposing = true;
      state.opposing_since = state.t;
    } else if (state.t - state.opposing_since >= profile.yield_dwell) {
      bool give_way = true;
      if (profile.yield_rule == YieldRule::stochastic) {
        const double own = percept.confidence;
        const double other = state.partner_confidence;
        const double p = (own + other) > 0.0 ? other / (own + other) : 0.5;
        give_way = std::bernoulli_distribution(p)(rng);
        state.opposing_since = state.t;  // next window
      }
      if (give_way) {
        state.yielded = true;
        state.yielded_at = state.t;
        state.target_side = -target;
        state.opposing = false;
      }
    }
  }

  double force = 0.0;
  if (!state.yielded) {
    force = *state.target_side * magnitude;
  } else {
    const double along = profile.yield_style == YieldStyle::comply ? 1.0 : -1.0;
    force = along * *state.target_side * profile.resist_gain * magnitude;
  }
  state.last_force = force;
  return force;
}

}  // namespace hapdec
