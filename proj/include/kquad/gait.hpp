#pragma once

#include <array>
#include <optional>

#include "kquad/srb.hpp"
#include "kquad/terrain.hpp"

namespace kquad {

enum class GaitType { Trot, Bound };

const char* gait_name(GaitType gait);
GaitType gait_from_name(const std::string& name);

struct GaitSchedule {
  double trot_half_period{0.25};  // swing/stance half-period [s]
  // Bound duty cycle: front stance, flight, rear stance, flight.
  std::array<double, 4> bound_durations{0.1, 0.1, 0.05, 0.1};

  void validate() const {
    if (!(trot_half_period >= 0.2 && trot_half_period <= 0.5))
      throw std::invalid_argument(
          "GaitSchedule: trot half-period must be in [0.2, 0.5] s");
    for (double d : bound_durations)
      if (!(d > 0.0))
        throw std::invalid_argument("GaitSchedule: durations must be > 0");
  }
};

/// Leg indices for the contact/hold flag arrays.
enum LegIndex { kFR = 0, kFL = 1, kRR = 2, kRL = 3 };

struct FsmState {
  GaitType gait{GaitType::Trot};
  int phase{0};        // trot: 0 = FR-RL stance, 1 = FL-RR; bound: duty index
  double clock{0.0};   // seconds into the current phase
  std::array<bool, 4> contact{true, false, false, true};  // FR, FL, RR, RL
  std::array<bool, 4> hold{false, false, false, false};
  std::optional<GaitType> pending;

  ContactMode contact_mode() const;
};

struct FsmStep {
  ContactMode mode;
  bool phase_changed{false};
  bool gait_changed{false};
};

/// Advances the phase clock by dt, rolling into the next phase at the
/// duration boundary. Pending transitions activate only at their gate:
/// trot->bound at any trot phase boundary (bound starts at FrontStance),
/// bound->trot only on entry into Flight. Hold flags clear at rollover.
FsmStep fsm_advance(FsmState& state, double dt, const GaitSchedule& schedule);

/// Records a transition request; a request equal to the active gait is
/// dropped. Activation is gated inside fsm_advance.
void handle_transition(FsmState& state, GaitType request);

/// Duration of the phase the FSM is currently in.
double current_phase_duration(const FsmState& state,
                              const GaitSchedule& schedule);

struct SwingTarget {
  Vec2 position{0.0, 0.0};
  Vec2 velocity{0.0, 0.0};
};

/// Raibert-style touchdown point:
/// x_td = hip_x + vx * T_stance / 2 + k_v (vx - v_des); height from the
/// terrain at x_td.
SwingTarget raibert_foot_placement(const SrbState& x, const Vec2& hip_offset,
                                   double v_des, double T_stance, double k_v,
                                   const TerrainProfile& terrain);

/// Cubic-smoothstep horizontal, squared-sine vertical arch of the given apex
/// (terrain-relative; zero vertical velocity at both endpoints). `duration`
/// scales the returned velocities. If `hold` is set the swing foot is frozen
/// there with zero velocity.
SwingTarget swing_trajectory(const Vec2& start, const Vec2& target, double s,
                             double apex_height, double duration,
                             const std::optional<Vec2>& hold = std::nullopt);

/// Simulated contact sensing for swing feet: a foot not scheduled for stance
/// whose position is at or below the terrain gets its hold flag latched.
std::array<bool, 4> contact_obstacle_check(const std::array<Vec2, 4>& feet,
                                           const TerrainProfile& terrain,
                                           const std::array<bool, 4>& stance,
                                           const std::array<bool, 4>& holds);

}  // namespace kquad
