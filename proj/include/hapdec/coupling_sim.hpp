#pragma once

// Two one-DOF handles joined by a stiff spring-damper (virtual coupling),
// integrated with semi-implicit Euler. Positions are normalized: start at 0,
// end stops at -1 (first interval) and +1 (second interval).

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "agents.hpp"
#include "random.hpp"
#include "types.hpp"

namespace hapdec {

struct CouplingConfig {
  double dt = 0.001;                 // s
  double handle_mass = 0.05;         // kg
  double handle_damping = 0.002;     // N s / unit
  double coupling_stiffness = 2000;  // N / unit
  std::optional<double> coupling_damping;  // N s / unit; default 2 sqrt(k m)
  double target_threshold = 0.95;    // normalized position
  double dwell = 1.0;                // s
  double timeout = 30.0;             // s
  double x_thresh = 0.05;            // initiation zone half-width

  double effective_coupling_damping() const {
    return coupling_damping.value_or(2.0 * std::sqrt(coupling_stiffness * handle_mass));
  }

  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw std::invalid_argument(std::string("CouplingConfig: ") + what);
    };
    require(dt > 0.0 && std::isfinite(dt), "dt must be positive");
    require(handle_mass > 0.0, "handle_mass must be positive");
    require(handle_damping >= 0.0, "handle_damping must be non-negative");
    require(coupling_stiffness >= 0.0, "coupling_stiffness must be non-negative");
    require(effective_coupling_damping() >= 0.0, "coupling_damping must be non-negative");
    require(target_threshold > 0.0 && target_threshold < 1.0, "target_threshold must lie in (0, 1)");
    require(dwell >= 0.0 && timeout > 0.0, "dwell and timeout must be non-negative / positive");
    require(x_thresh > 0.0 && x_thresh < 1.0, "x_thresh must lie in (0, 1)");
  }
};

/// Fixed-step record of both handles. Step k is at time k * dt.
struct TrajectoryLog {
  double dt = 0.001;
  std::vector<double> x1, x2, v1, v2, f1, f2, fc1, fc2;

  std::size_t size() const { return x1.size(); }
  bool empty() const { return x1.empty(); }
  double time(std::size_t k) const { return static_cast<double>(k) * dt; }
  double x_display(std::size_t k) const { return 0.5 * (x1[k] + x2[k]); }
  double v_display(std::size_t k) const { return 0.5 * (v1[k] + v2[k]); }

  const std::vector<double>& x(int member) const { return member == 0 ? x1 : x2; }
  const std::vector<double>& v(int member) const { return member == 0 ? v1 : v2; }
  const std::vector<double>& f(int member) const { return member == 0 ? f1 : f2; }
  const std::vector<double>& fc(int member) const { return member == 0 ? fc1 : fc2; }

  void reserve(std::size_t n) {
    for (auto* v : {&x1, &x2, &v1, &v2, &f1, &f2, &fc1, &fc2}) v->reserve(n);
  }
};

struct HandleState {
  double x = 0.0;
  double v = 0.0;
};

/// The coupled two-handle plant.
class CoupledPlant {
 public:
  explicit CoupledPlant(const CouplingConfig& cfg)
      : cfg_(cfg), damping_(cfg.effective_coupling_damping()) {}

  const std::array<HandleState, 2>& state() const { return h_; }
  void set_state(const std::array<HandleState, 2>& s) { h_ = s; }

  /// Coupling force on handle `i` from the link.
  double coupling_force(int i) const {
    const int j = 1 - i;
    return -cfg_.coupling_stiffness * (h_[i].x - h_[j].x) - damping_ * (h_[i].v - h_[j].v);
  }

  void step(double f1, double f2) {
    const std::array<double, 2> applied{f1, f2};
    const std::array<double, 2> link{coupling_force(0), coupling_force(1)};
    for (int i = 0; i < 2; ++i) {
      const double a = (applied[i] + link[i] - cfg_.handle_damping * h_[i].v) / cfg_.handle_mass;
      h_[i].v += cfg_.dt * a;
      h_[i].x += cfg_.dt * h_[i].v;
      clamp_to_stops(h_[i]);
    }
  }

  /// Kinetic energy of both handles plus the spring's potential energy.
  double mechanical_energy() const {
    const double dx = h_[0].x - h_[1].x;
    return 0.5 * cfg_.handle_mass * (h_[0].v * h_[0].v + h_[1].v * h_[1].v) +
           0.5 * cfg_.coupling_stiffness * dx * dx;
  }

  static void clamp_to_stops(HandleState& h) {
    if (h.x > 1.0) {
      h.x = 1.0;
      if (h.v > 0.0) h.v = 0.0;
    } else if (h.x < -1.0) {
      h.x = -1.0;
      if (h.v < 0.0) h.v = 0.0;
    }
  }

 private:
  CouplingConfig cfg_;
  double damping_;
  std::array<HandleState, 2> h_{};
};

/// Tracks the "hold at an extreme for `dwell` seconds" validation rule.
class DwellValidator {
 public:
  DwellValidator(double threshold, double dwell) : threshold_(threshold), dwell_(dwell) {}

  /// Returns true once the position has stayed beyond the threshold on one side long enough.
  bool update(double t, double position) {
    const double side = position >= threshold_ ? 1.0 : (position <= -threshold_ ? -1.0 : 0.0);
    if (side == 0.0) {
      holding_ = false;
      side_ = 0.0;
      return false;
    }
    if (!holding_ || side != side_) {
      holding_ = true;
      since_ = t;
      side_ = side;
    }
    return t - since_ >= dwell_ - 1e-12;
  }

  double side() const { return side_; }

 private:
  double threshold_;
  double dwell_;
  bool holding_ = false;
  double since_ = 0.0;
  double side_ = 0.0;
};

struct GroupOutcome {
  Choice choice = Choice::first;
  double decision_time = 0.0;  // s, group-phase start to dwell completion
  bool completed = false;
  TrajectoryLog log;           // empty when the session discards trajectories
  std::array<std::optional<double>, 2> onset_time;   // first nonzero applied force
  std::array<std::optional<double>, 2> yielded_at;
  std::optional<double> initiation_time;             // first exit from +-x_thresh
  double max_gap = 0.0;                              // max |x1 - x2|
  double max_link_asymmetry = 0.0;                   // max |fc1 + fc2|
};

/// Forces for both handles at step k given time, plant state and the sensed link forces.
using ForcePolicy = std::function<std::array<double, 2>(double t, const std::array<HandleState, 2>&,
                                                        const std::array<double, 2>& link)>;

/// Runs the coupled plant from rest under `policy` until dwell completion or timeout.
inline GroupOutcome simulate_coupled(const CouplingConfig& cfg, const ForcePolicy& policy, bool keep_log = true,
                                     const std::array<HandleState, 2>& initial = {}) {
  cfg.validate();
  CoupledPlant plant(cfg);
  plant.set_state(initial);
  DwellValidator dwell(cfg.target_threshold, cfg.dwell);
  GroupOutcome out;
  out.log.dt = cfg.dt;
  const auto max_steps = static_cast<std::size_t>(std::llround(cfg.timeout / cfg.dt));
  if (keep_log) out.log.reserve(std::min<std::size_t>(max_steps + 1, 8192));

  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    const auto& s = plant.state();
    const std::array<double, 2> link{plant.coupling_force(0), plant.coupling_force(1)};
    const auto forces = policy(t, s, link);

    out.max_gap = std::max(out.max_gap, std::fabs(s[0].x - s[1].x));
    out.max_link_asymmetry = std::max(out.max_link_asymmetry, std::fabs(link[0] + link[1]));
    for (int i = 0; i < 2; ++i)
      if (!out.onset_time[i] && forces[i] != 0.0) out.onset_time[i] = t;
    if (!out.initiation_time && (std::fabs(s[0].x) > cfg.x_thresh || std::fabs(s[1].x) > cfg.x_thresh))
      out.initiation_time = t;
    if (keep_log) {
      out.log.x1.push_back(s[0].x);
      out.log.x2.push_back(s[1].x);
      out.log.v1.push_back(s[0].v);
      out.log.v2.push_back(s[1].v);
      out.log.f1.push_back(forces[0]);
      out.log.f2.push_back(forces[1]);
      out.log.fc1.push_back(link[0]);
      out.log.fc2.push_back(link[1]);
    }

    const double x_display = 0.5 * (s[0].x + s[1].x);
    if (dwell.update(t, x_display)) {
      out.completed = true;
      out.decision_time = t;
      out.choice = choice_from_side(dwell.side());
      return out;
    }
    if (k >= max_steps) {
      out.completed = false;
      out.decision_time = t;
      out.choice = choice_from_side(x_display);
      return out;
    }
    plant.step(forces[0], forces[1]);
  }
}

/// Coupled group phase for two agents holding opposite percepts.
inline GroupOutcome simulate_group_trial(const std::array<AgentProfile, 2>& agents,
                                         const std::array<Percept, 2>& percepts, const CouplingConfig& cfg,
                                         Rng& rng, bool keep_log = true) {
  for (const auto& a : agents) a.validate();
  if (percepts[0].choice == percepts[1].choice)
    throw std::invalid_argument("simulate_group_trial: the group phase requires disagreeing percepts");

  std::array<NegotiationState, 2> st{};
  st[0].partner_confidence = percepts[1].confidence;
  st[1].partner_confidence = percepts[0].confidence;
  ForcePolicy policy = [&](double t, const std::array<HandleState, 2>&, const std::array<double, 2>& link) {
    std::array<double, 2> f{};
    for (int i = 0; i < 2; ++i) {
      st[i].t = t;
      st[i].partner_force_sensed = link[i];
      f[i] = negotiation_force(percepts[i], agents[i], st[i], rng);
    }
    return f;
  };
  GroupOutcome out = simulate_coupled(cfg, policy, keep_log);
  for (int i = 0; i < 2; ++i)
    if (st[i].yielded) out.yielded_at[i] = st[i].yielded_at;
  return out;
}

/// Single-handle log of the individual phase.
struct HandleLog {
  double dt = 0.001;
  std::vector<double> x, v, f;
  std::size_t size() const { return x.size(); }
};

struct IndividualOutcome {
  Choice choice = Choice::first;
  double rt = 0.0;                         // s
  std::optional<double> initiation_time;   // s, first exit from +-x_thresh
  bool completed = false;
  double decision_time = 0.0;              // s, dwell completion (or timeout)
  HandleLog log;
};

/// Independent handle: force toward the percept's side starting at the response time.
inline IndividualOutcome simulate_individual_trial(const AgentProfile& agent, const Percept& percept,
                                                   const CouplingConfig& cfg, Rng& rng, bool keep_log = true) {
  agent.validate();
  cfg.validate();
  IndividualOutcome out;
  out.choice = percept.choice;
  out.rt = individual_rt(percept, agent, rng);
  out.log.dt = cfg.dt;

  const double force = side_of(percept.choice) * intended_force(percept, agent);
  HandleState h;
  DwellValidator dwell(cfg.target_threshold, cfg.dwell);
  const auto max_steps = static_cast<std::size_t>(std::llround(cfg.timeout / cfg.dt));
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    const double f = t >= out.rt ? force : 0.0;
    if (!out.initiation_time && std::fabs(h.x) > cfg.x_thresh) out.initiation_time = t;
    if (keep_log) {
      out.log.x.push_back(h.x);
      out.log.v.push_back(h.v);
      out.log.f.push_back(f);
    }
    if (dwell.update(t, h.x)) {
      out.completed = true;
      out.decision_time = t;
      return out;
    }
    if (k >= max_steps) {
      out.decision_time = t;
      return out;
    }
    const double a = (f - cfg.handle_damping * h.v) / cfg.handle_mass;
    h.v += cfg.dt * a;
    h.x += cfg.dt * h.v;
    CoupledPlant::clamp_to_stops(h);
  }
}

}  // namespace hapdec
