#include "doctest.h"

#include "kquad/gait.hpp"

#include <cmath>

using namespace kquad;

namespace {

const TerrainProfile kFlat{};

bool pair_fr_rl(const std::array<bool, 4>& c) {
  return c[kFR] && !c[kFL] && !c[kRR] && c[kRL];
}
bool pair_fl_rr(const std::array<bool, 4>& c) {
  return !c[kFR] && c[kFL] && c[kRR] && !c[kRL];
}

}  // namespace

TEST_CASE("gait names round trip") {
  CHECK(gait_from_name(gait_name(GaitType::Trot)) == GaitType::Trot);
  CHECK(gait_from_name(gait_name(GaitType::Bound)) == GaitType::Bound);
  CHECK_THROWS_AS(gait_from_name("gallop"), std::invalid_argument);
}

TEST_CASE("trot phase rollover keeps the remainder") {
  GaitSchedule schedule;
  schedule.trot_half_period = 0.2;
  FsmState fsm;
  fsm.clock = 0.19;
  CHECK(pair_fr_rl(fsm.contact));
  const FsmStep step = fsm_advance(fsm, 0.02, schedule);
  CHECK(step.phase_changed);
  CHECK_FALSE(step.gait_changed);
  CHECK(fsm.phase == 1);
  CHECK(fsm.clock == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(pair_fl_rr(fsm.contact));
  CHECK(step.mode == ContactMode::Trot);
}

TEST_CASE("bound front stance rolls into flight") {
  GaitSchedule schedule;
  FsmState fsm;
  fsm.gait = GaitType::Bound;
  fsm.phase = 0;
  fsm.clock = 0.09;
  fsm.contact = {true, true, false, false};
  const FsmStep step = fsm_advance(fsm, 0.02, schedule);
  CHECK(step.phase_changed);
  CHECK(fsm.phase == 1);
  CHECK(fsm.clock == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(step.mode == ContactMode::Flight);
  CHECK(fsm.contact == std::array<bool, 4>{false, false, false, false});
}

TEST_CASE("bound cycle closes after 0.35 s") {
  GaitSchedule schedule;
  FsmState fsm;
  fsm.gait = GaitType::Bound;
  fsm.phase = 0;
  fsm.contact = {true, true, false, false};
  double flight_time = 0.0;
  const double dt = 0.001;
  for (int i = 0; i < 350; ++i) {
    const FsmStep step = fsm_advance(fsm, dt, schedule);
    if (step.mode == ContactMode::Flight) flight_time += dt;
    // Only the scheduled duty modes appear.
    CHECK((step.mode == ContactMode::FrontStance ||
           step.mode == ContactMode::RearStance ||
           step.mode == ContactMode::Flight));
  }
  CHECK(fsm.phase == 0);
  CHECK(fsm.clock == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(flight_time == doctest::Approx(0.2).epsilon(0.02));
}

TEST_CASE("contact mode reflects phase flags") {
  FsmState fsm;
  CHECK(fsm.contact_mode() == ContactMode::Trot);
  fsm.phase = 1;
  CHECK(fsm.contact_mode() == ContactMode::Trot);
  fsm.gait = GaitType::Bound;
  fsm.phase = 0;
  CHECK(fsm.contact_mode() == ContactMode::FrontStance);
  fsm.phase = 1;
  CHECK(fsm.contact_mode() == ContactMode::Flight);
  fsm.phase = 2;
  CHECK(fsm.contact_mode() == ContactMode::RearStance);
  fsm.phase = 3;
  CHECK(fsm.contact_mode() == ContactMode::Flight);
}

TEST_CASE("trot to bound activates at the next phase boundary") {
  GaitSchedule schedule;
  FsmState fsm;
  fsm.clock = 0.10;
  handle_transition(fsm, GaitType::Bound);
  REQUIRE(fsm.pending == GaitType::Bound);
  // Mid-phase advances keep trotting.
  FsmStep step = fsm_advance(fsm, 0.05, schedule);
  CHECK_FALSE(step.gait_changed);
  CHECK(fsm.gait == GaitType::Trot);
  // The boundary crossing lands directly in bound front stance.
  step = fsm_advance(fsm, 0.12, schedule);
  CHECK(step.gait_changed);
  CHECK(step.phase_changed);
  CHECK(fsm.gait == GaitType::Bound);
  CHECK(fsm.phase == 0);
  CHECK(step.mode == ContactMode::FrontStance);
  CHECK(fsm.contact == std::array<bool, 4>{true, true, false, false});
  CHECK_FALSE(fsm.pending.has_value());
}

TEST_CASE("bound to trot waits for flight") {
  GaitSchedule schedule;
  FsmState fsm;
  fsm.gait = GaitType::Bound;
  fsm.phase = 2;  // rear stance
  fsm.contact = {false, false, true, true};
  handle_transition(fsm, GaitType::Trot);
  // Still in rear stance: no switch.
  FsmStep step = fsm_advance(fsm, 0.01, schedule);
  CHECK_FALSE(step.gait_changed);
  CHECK(fsm.gait == GaitType::Bound);
  // Rolling into flight is not enough: part of that advance was in stance.
  step = fsm_advance(fsm, 0.05, schedule);
  CHECK_FALSE(step.gait_changed);
  CHECK(step.mode == ContactMode::Flight);
  // The first advance spent entirely airborne activates the switch.
  step = fsm_advance(fsm, 0.01, schedule);
  CHECK(step.gait_changed);
  CHECK(fsm.gait == GaitType::Trot);
  CHECK(fsm.phase == 0);
  CHECK(fsm.clock == 0.0);
  CHECK(pair_fr_rl(fsm.contact));
  CHECK_FALSE(fsm.pending.has_value());
}

TEST_CASE("same-gait transition request is dropped") {
  FsmState fsm;
  fsm.pending = GaitType::Bound;
  handle_transition(fsm, GaitType::Trot);
  CHECK_FALSE(fsm.pending.has_value());
  GaitSchedule schedule;
  FsmState copy = fsm;
  for (int i = 0; i < 100; ++i) fsm_advance(fsm, 0.01, schedule);
  for (int i = 0; i < 100; ++i) fsm_advance(copy, 0.01, schedule);
  CHECK(fsm.gait == copy.gait);
  CHECK(fsm.phase == copy.phase);
  CHECK(fsm.clock == copy.clock);
}

TEST_CASE("phase rollover clears hold flags") {
  GaitSchedule schedule;
  FsmState fsm;
  fsm.hold = {false, true, true, false};
  fsm.clock = 0.24;
  fsm_advance(fsm, 0.02, schedule);
  CHECK(fsm.hold == std::array<bool, 4>{false, false, false, false});
}

TEST_CASE("fsm input validation") {
  GaitSchedule schedule;
  FsmState fsm;
  CHECK_THROWS_AS(fsm_advance(fsm, 0.0, schedule), std::invalid_argument);
  schedule.trot_half_period = 0.1;
  CHECK_THROWS_AS(schedule.validate(), std::invalid_argument);
  schedule = GaitSchedule{};
  schedule.bound_durations[2] = 0.0;
  CHECK_THROWS_AS(schedule.validate(), std::invalid_argument);
}

TEST_CASE("raibert touchdown point") {
  SUBCASE("velocity feedback example") {
    SrbState x;
    x.p_dot = Vec2{0.4, 0.0};
    const SwingTarget t = raibert_foot_placement(x, Vec2::Zero(), 0.3, 0.25,
                                                 0.03, kFlat);
    CHECK(t.position.x() == doctest::Approx(0.053).epsilon(1e-12));
    CHECK(t.position.y() == 0.0);
    CHECK(t.velocity.norm() == 0.0);
  }
  SUBCASE("hip offset rotates with the body") {
    SrbState x;
    x.p = Vec2{1.0, 0.3};
    x.theta = M_PI / 2;
    const SwingTarget t = raibert_foot_placement(x, Vec2{0.19, 0.0}, 0.0, 0.25,
                                                 0.0, kFlat);
    CHECK(t.position.x() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("terrain sets the touchdown height") {
    TerrainProfile terrain;
    terrain.blocks.push_back({-1.0, 1.0, 0.06});
    SrbState x;
    const SwingTarget t =
        raibert_foot_placement(x, Vec2::Zero(), 0.0, 0.25, 0.0, terrain);
    CHECK(t.position.y() == 0.06);
  }
  SUBCASE("zero stance time is rejected") {
    CHECK_THROWS_AS(
        raibert_foot_placement(SrbState{}, Vec2::Zero(), 0.0, 0.0, 0.0, kFlat),
        std::invalid_argument);
  }
}

TEST_CASE("swing trajectory endpoints, apex, and hold") {
  const Vec2 start{0.0, 0.0};
  const Vec2 target{0.2, 0.01};
  const double apex = 0.08;
  const double T = 0.25;
  SwingTarget a = swing_trajectory(start, target, 0.0, apex, T);
  CHECK((a.position - start).norm() == 0.0);
  CHECK(a.velocity.norm() == doctest::Approx(0.0).epsilon(1e-12));
  a = swing_trajectory(start, target, 1.0, apex, T);
  CHECK((a.position - target).norm() < 1e-12);
  CHECK(std::abs(a.velocity.y()) < 1e-12);  // soft touchdown

  const SwingTarget mid = swing_trajectory(start, target, 0.5, apex, T);
  CHECK(mid.position.x() == doctest::Approx(0.1));
  CHECK(mid.position.y() == doctest::Approx(0.005 + apex));

  // The apex dominates every other sample of the arch.
  for (double s = 0.0; s <= 1.0; s += 0.05) {
    const SwingTarget p = swing_trajectory(start, start, s, apex, T);
    CHECK(p.position.y() <= apex + 1e-12);
  }

  // Doubling the duration halves the speed at matching s.
  const SwingTarget fast = swing_trajectory(start, target, 0.3, apex, T);
  const SwingTarget slow = swing_trajectory(start, target, 0.3, apex, 2 * T);
  CHECK((fast.velocity - 2.0 * slow.velocity).norm() < 1e-12);

  const Vec2 held{0.07, 0.06};
  const SwingTarget h = swing_trajectory(start, target, 0.4, apex, T, held);
  CHECK((h.position - held).norm() == 0.0);
  CHECK(h.velocity.norm() == 0.0);

  CHECK_THROWS_AS(swing_trajectory(start, target, -0.1, apex, T),
                  std::invalid_argument);
  CHECK_THROWS_AS(swing_trajectory(start, target, 1.1, apex, T),
                  std::invalid_argument);
}

TEST_CASE("obstacle contact check latches swing feet below terrain") {
  TerrainProfile terrain;
  terrain.blocks.push_back({1.0, 1.4, 0.06});
  const std::array<bool, 4> stance{true, false, false, true};
  const std::array<bool, 4> none{false, false, false, false};

  SUBCASE("clear swing feet stay unlatched") {
    const std::array<Vec2, 4> feet{Vec2{0.2, 0.0}, Vec2{0.5, 0.08},
                                   Vec2{0.6, 0.04}, Vec2{0.9, 0.0}};
    CHECK(contact_obstacle_check(feet, terrain, stance, none) == none);
  }
  SUBCASE("a swing foot inside a block latches") {
    const std::array<Vec2, 4> feet{Vec2{0.2, 0.0}, Vec2{1.2, 0.03},
                                   Vec2{0.6, 0.04}, Vec2{0.9, 0.0}};
    const auto out = contact_obstacle_check(feet, terrain, stance, none);
    CHECK(out == std::array<bool, 4>{false, true, false, false});
  }
  SUBCASE("stance feet are exempt") {
    const std::array<Vec2, 4> feet{Vec2{1.2, 0.0}, Vec2{0.5, 0.08},
                                   Vec2{0.6, 0.04}, Vec2{1.3, 0.0}};
    CHECK(contact_obstacle_check(feet, terrain, stance, none) == none);
  }
  SUBCASE("existing holds persist") {
    const std::array<bool, 4> holds{false, false, true, false};
    const std::array<Vec2, 4> feet{Vec2{0.2, 0.0}, Vec2{0.5, 0.08},
                                   Vec2{0.6, 0.04}, Vec2{0.9, 0.0}};
    CHECK(contact_obstacle_check(feet, terrain, stance, holds) == holds);
  }
}
