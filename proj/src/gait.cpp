#include "kquad/gait.hpp"

#include <cmath>

namespace kquad {

const char* gait_name(GaitType gait) {
  return gait == GaitType::Trot ? "trot" : "bound";
}

GaitType gait_from_name(const std::string& name) {
  if (name == "trot") return GaitType::Trot;
  if (name == "bound") return GaitType::Bound;
  throw std::invalid_argument("unknown gait name: " + name);
}

namespace {

constexpr ContactMode kBoundModes[4] = {ContactMode::FrontStance,
                                        ContactMode::Flight,
                                        ContactMode::RearStance,
                                        ContactMode::Flight};

std::array<bool, 4> contact_flags(GaitType gait, int phase) {
  if (gait == GaitType::Trot) {
    if (phase == 0) return {true, false, false, true};   // FR-RL
    return {false, true, true, false};                   // FL-RR
  }
  switch (phase) {
    case 0: return {true, true, false, false};   // front stance
    case 2: return {false, false, true, true};   // rear stance
    default: return {false, false, false, false};
  }
}

}  // namespace

ContactMode FsmState::contact_mode() const {
  if (gait == GaitType::Trot) return ContactMode::Trot;
  return kBoundModes[phase];
}

double current_phase_duration(const FsmState& state,
                              const GaitSchedule& schedule) {
  if (state.gait == GaitType::Trot) return schedule.trot_half_period;
  return schedule.bound_durations[static_cast<std::size_t>(state.phase)];
}

void handle_transition(FsmState& state, GaitType request) {
  if (request == state.gait) {
    state.pending.reset();
    return;
  }
  state.pending = request;
}

FsmStep fsm_advance(FsmState& state, double dt, const GaitSchedule& schedule) {
  if (!(dt > 0.0)) throw std::invalid_argument("fsm_advance: dt must be > 0");
  schedule.validate();

  FsmStep step;
  const bool airborne_before = state.contact_mode() == ContactMode::Flight;
  state.clock += dt;
  const double duration = current_phase_duration(state, schedule);
  if (state.clock >= duration - 1e-12) {
    state.clock -= duration;
    state.hold = {false, false, false, false};
    step.phase_changed = true;
    if (state.gait == GaitType::Trot) {
      if (state.pending == GaitType::Bound) {
        state.gait = GaitType::Bound;
        state.phase = 0;  // bound starts at front stance
        state.pending.reset();
        step.gait_changed = true;
      } else {
        state.phase ^= 1;
      }
    } else {
      state.phase = (state.phase + 1) % 4;
    }
    state.contact = contact_flags(state.gait, state.phase);
  }
  // Bound -> trot is gated on flight: activates at the first advance spent
  // entirely airborne, so the switch instant lies strictly inside a flight
  // interval and carries no contact flags.
  if (state.gait == GaitType::Bound && state.pending == GaitType::Trot &&
      airborne_before && state.contact_mode() == ContactMode::Flight) {
    state.gait = GaitType::Trot;
    state.phase = 0;
    state.clock = 0.0;
    state.pending.reset();
    state.contact = contact_flags(state.gait, state.phase);
    step.phase_changed = true;
    step.gait_changed = true;
  }
  step.mode = state.contact_mode();
  return step;
}

SwingTarget raibert_foot_placement(const SrbState& x, const Vec2& hip_offset,
                                   double v_des, double T_stance, double k_v,
                                   const TerrainProfile& terrain) {
  if (!(T_stance > 0.0))
    throw std::invalid_argument("raibert_foot_placement: T_stance must be > 0");
  const Vec2 hip = x.p + rotation_matrix(x.theta) * hip_offset;
  const double td_x =
      hip.x() + x.p_dot.x() * T_stance / 2.0 + k_v * (x.p_dot.x() - v_des);
  SwingTarget target;
  target.position = Vec2{td_x, terrain.height_at(td_x)};
  target.velocity.setZero();
  return target;
}

SwingTarget swing_trajectory(const Vec2& start, const Vec2& target, double s,
                             double apex_height, double duration,
                             const std::optional<Vec2>& hold) {
  if (!(s >= 0.0 && s <= 1.0))
    throw std::invalid_argument("swing_trajectory: s must be in [0, 1]");
  SwingTarget out;
  if (hold) {
    out.position = *hold;
    out.velocity.setZero();
    return out;
  }
  const double sw = s * s * (3.0 - 2.0 * s);
  const double dsw = 6.0 * s * (1.0 - s);
  const double arch = apex_height * std::sin(M_PI * s) * std::sin(M_PI * s);
  const double darch =
      apex_height * M_PI * std::sin(2.0 * M_PI * s);  // d/ds sin^2(pi s)
  out.position = start + sw * (target - start);
  out.position.y() += arch;
  const double inv_T = duration > 0.0 ? 1.0 / duration : 0.0;
  out.velocity = dsw * (target - start) * inv_T;
  out.velocity.y() += darch * inv_T;
  return out;
}

std::array<bool, 4> contact_obstacle_check(const std::array<Vec2, 4>& feet,
                                           const TerrainProfile& terrain,
                                           const std::array<bool, 4>& stance,
                                           const std::array<bool, 4>& holds) {
  std::array<bool, 4> out = holds;
  for (int i = 0; i < 4; ++i) {
    if (stance[static_cast<std::size_t>(i)]) continue;
    const Vec2& f = feet[static_cast<std::size_t>(i)];
    if (f.y() + 1e-9 < terrain.height_at(f.x()))
      out[static_cast<std::size_t>(i)] = true;
  }
  return out;
}

}  // namespace kquad
