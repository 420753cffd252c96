#include <catch_amalgamated.hpp>

#include <cmath>

#include "hapdec/coupling_sim.hpp"

using namespace hapdec;

namespace {

Percept percept_with(double confidence, Choice c) {
  Percept p;
  p.choice = c;
  p.confidence = confidence;
  p.x = side_of(c) * confidence;
  return p;
}

ForcePolicy constant(double f1, double f2) {
  return [=](double, const std::array<HandleState, 2>&, const std::array<double, 2>&) {
    return std::array<double, 2>{f1, f2};
  };
}

}  // namespace

TEST_CASE("CouplingConfig validation", "[coupling]") {
  CouplingConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.effective_coupling_damping() == Catch::Approx(2.0 * std::sqrt(2000.0 * 0.05)));
  c.dt = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.target_threshold = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.coupling_damping = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("zero force stays at rest and times out", "[coupling]") {
  CouplingConfig c;
  c.timeout = 3.0;
  const auto out = simulate_coupled(c, constant(0.0, 0.0));
  CHECK_FALSE(out.completed);
  CHECK(out.decision_time == Catch::Approx(3.0));
  REQUIRE(out.log.size() == 3001);
  for (std::size_t k = 0; k < out.log.size(); ++k) REQUIRE(out.log.x_display(k) == 0.0);
  CHECK_FALSE(out.initiation_time);
  CHECK_FALSE(out.onset_time[0]);
}

TEST_CASE("single unopposed force reaches the right stop", "[coupling]") {
  const CouplingConfig c;
  const auto out = simulate_coupled(c, constant(0.5, 0.0));
  REQUIRE(out.completed);
  CHECK(out.choice == Choice::second);
  CHECK(out.log.x_display(out.log.size() - 1) >= c.target_threshold);
  CHECK(out.decision_time >= c.dwell);
  CHECK(out.onset_time[0] == 0.0);
  CHECK_FALSE(out.onset_time[1]);

  const auto left = simulate_coupled(c, constant(0.0, -0.5));
  REQUIRE(left.completed);
  CHECK(left.choice == Choice::first);
}

TEST_CASE("dwell requires an uninterrupted hold", "[coupling]") {
  DwellValidator d(0.95, 1.0);
  CHECK_FALSE(d.update(0.0, 0.96));
  CHECK_FALSE(d.update(0.5, 0.97));
  CHECK_FALSE(d.update(0.6, 0.5));  // left the zone
  CHECK_FALSE(d.update(0.7, 0.96));
  CHECK_FALSE(d.update(1.6, 0.96));
  CHECK(d.update(1.7, 0.99));
  CHECK(d.side() == 1.0);
  DwellValidator flip(0.95, 1.0);
  CHECK_FALSE(flip.update(0.0, 0.96));
  CHECK_FALSE(flip.update(0.5, -0.96));  // crossed sides: restart
  CHECK_FALSE(flip.update(1.2, -0.96));
  CHECK(flip.update(1.5, -0.96));
  CHECK(flip.side() == -1.0);
}

TEST_CASE("passive plant does not gain energy", "[coupling]") {
  const CouplingConfig c;
  for (const auto& init : {std::array<HandleState, 2>{HandleState{0.0, 0.8}, HandleState{0.0, 0.8}},
                           std::array<HandleState, 2>{HandleState{0.0, 0.8}, HandleState{0.0, -0.3}},
                           std::array<HandleState, 2>{HandleState{0.01, 0.0}, HandleState{-0.01, 0.0}}}) {
    CoupledPlant p(c);
    p.set_state(init);
    double prev = p.mechanical_energy();
    const double e0 = prev;
    REQUIRE(e0 > 0.0);
    for (int k = 0; k < 20000; ++k) {
      p.step(0.0, 0.0);
      const double e = p.mechanical_energy();
      // the symplectic step carries an O(dt) energy ripple on the stiff mode
      REQUIRE(e <= prev + 1e-3 * e0);
      REQUIRE(e <= e0 * (1.0 + 1e-3));
      prev = std::min(prev, e);
    }
    CHECK(p.mechanical_energy() < 0.5 * e0);
  }
}

TEST_CASE("link forces are equal and opposite", "[coupling]") {
  const AgentProfile a;
  Rng rng = derive_rng(1, {});
  const auto out = simulate_group_trial({a, a}, {percept_with(2.0, Choice::second), percept_with(1.0, Choice::first)},
                                        CouplingConfig{}, rng);
  REQUIRE(out.log.size() > 100);
  for (std::size_t k = 0; k < out.log.size(); ++k) REQUIRE(out.log.fc1[k] == -out.log.fc2[k]);
  CHECK(out.max_link_asymmetry == 0.0);
}

TEST_CASE("more confident agent wins, slower than alone", "[coupling]") {
  const AgentProfile a;
  const CouplingConfig c;
  Rng rng = derive_rng(2, {});
  const auto p1 = percept_with(2.0, Choice::second);
  const auto p2 = percept_with(0.8, Choice::first);
  const auto out = simulate_group_trial({a, a}, {p1, p2}, c, rng);
  REQUIRE(out.completed);
  CHECK(out.choice == Choice::second);
  const auto alone = simulate_individual_trial(a, p1, c, rng, false);
  CHECK(out.decision_time > alone.rt);
  CHECK(out.decision_time > alone.decision_time);
  CHECK_THROWS_AS(simulate_group_trial({a, a}, {p1, p1}, c, rng), std::invalid_argument);
}

TEST_CASE("swapping agents mirrors the log", "[coupling]") {
  AgentProfile a, b;
  b.force_gain = 0.7;
  b.onset_base = 0.4;
  const CouplingConfig c;
  Rng r1 = derive_rng(3, {}), r2 = derive_rng(3, {});
  const auto pa = percept_with(1.1, Choice::first);
  const auto pb = percept_with(0.9, Choice::second);
  const auto o1 = simulate_group_trial({a, b}, {pa, pb}, c, r1);
  const auto o2 = simulate_group_trial({b, a}, {pb, pa}, c, r2);
  REQUIRE(o1.log.size() == o2.log.size());
  CHECK(o1.choice == o2.choice);
  CHECK(o1.decision_time == o2.decision_time);
  for (std::size_t k = 0; k < o1.log.size(); ++k) {
    REQUIRE(o1.log.x1[k] == o2.log.x2[k]);
    REQUIRE(o1.log.x2[k] == o2.log.x1[k]);
    REQUIRE(o1.log.f1[k] == o2.log.f2[k]);
    REQUIRE(o1.log.fc1[k] == o2.log.fc2[k]);
  }
}

TEST_CASE("position gap tightens with stiffness", "[coupling]") {
  const AgentProfile a;
  const auto p1 = percept_with(50.0, Choice::second);  // saturated force
  const auto p2 = percept_with(50.0, Choice::first);
  double prev = 1e9;
  for (double k : {500.0, 2000.0, 8000.0}) {
    CouplingConfig c;
    c.coupling_stiffness = k;
    Rng rng = derive_rng(4, {});
    const auto out = simulate_group_trial({a, a}, {p1, p2}, c, rng);
    INFO("k = " << k << " gap " << out.max_gap);
    CHECK(out.max_gap < prev);
    if (k >= 2000.0) CHECK(out.max_gap <= 0.02);
    prev = out.max_gap;
  }
}

TEST_CASE("stable over random trials", "[coupling]") {
  const CouplingConfig c;
  Rng rng = derive_rng(5, {});
  std::uniform_real_distribution<double> conf(0.0, 5.0);
  std::uniform_real_distribution<double> gain(0.1, 1.0);
  int completed = 0;
  double worst_gap = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    AgentProfile a, b;
    a.force_gain = gain(rng);
    b.force_gain = gain(rng);
    const Choice ca = i % 2 ? Choice::first : Choice::second;
    const auto out = simulate_group_trial({a, b}, {percept_with(conf(rng), ca), percept_with(conf(rng), opposite(ca))},
                                          c, rng, false);
    REQUIRE(std::isfinite(out.decision_time));
    REQUIRE(std::isfinite(out.max_gap));
    worst_gap = std::max(worst_gap, out.max_gap);
    completed += out.completed;
  }
  CHECK(worst_gap <= 0.02);
  CHECK(completed > n * 0.95);
}

TEST_CASE("individual trial", "[coupling]") {
  const CouplingConfig c;
  Rng rng = derive_rng(6, {});
  const AgentProfile a;
  const auto zero = simulate_individual_trial(a, percept_with(0.0, Choice::first), c, rng);
  CHECK_FALSE(zero.completed);
  CHECK_FALSE(zero.initiation_time);

  double hi = 0.0, lo = 0.0;
  for (int i = 0; i < 1000; ++i) {
    for (Choice ch : {Choice::first, Choice::second}) {
      const auto out = simulate_individual_trial(a, percept_with(0.4, ch), c, rng, false);
      REQUIRE(out.choice == ch);
      REQUIRE(out.completed);
    }
    hi += *simulate_individual_trial(a, percept_with(3.0, Choice::second), c, rng, false).initiation_time;
    lo += *simulate_individual_trial(a, percept_with(0.3, Choice::second), c, rng, false).initiation_time;
  }
  CHECK(hi < lo);

  const auto logged = simulate_individual_trial(a, percept_with(1.0, Choice::second), c, rng);
  REQUIRE(logged.completed);
  const std::size_t start = static_cast<std::size_t>(std::ceil(logged.rt / c.dt));
  for (std::size_t k = 0; k < std::min(start, logged.log.size()); ++k) REQUIRE(logged.log.f[k] == 0.0);
  CHECK(logged.log.x.back() >= c.target_threshold);
}
