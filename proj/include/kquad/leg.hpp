#pragma once

#include "kquad/srb.hpp"

namespace kquad {

struct LegParams {
  double l1{0.213};  // thigh length [m]
  double l2{0.213};  // calf length [m]
  Vec2 hip_offset{0.0, 0.0};  // hip position relative to CoM, body frame
  Mat2 Kp{(Mat2() << 30.0, 0.0, 0.0, 30.0).finished()};
  Mat2 Kd{(Mat2() << 1.0, 0.0, 0.0, 1.0).finished()};

  void validate() const {
    if (!(l1 > 0.0) || !(l2 > 0.0))
      throw std::invalid_argument("LegParams: link lengths must be > 0");
  }
};

/// Hip and knee angles; q = (0, 0) points the leg straight down, knee-back
/// branch (knee angle in (-pi, 0]) for IK outputs.
struct JointState {
  Vec2 q{0.0, 0.0};
  Vec2 q_dot{0.0, 0.0};
};

class WorkspaceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Foot position in the hip frame.
Vec2 forward_kinematics(const JointState& q, const LegParams& params);

/// Law-of-cosines IK, knee-back branch. Throws WorkspaceError (naming the
/// requested distance) when the target lies outside [|l1-l2|, l1+l2].
JointState analytic_ik(const Vec2& foot, const LegParams& params);

/// d(foot)/d(q) of forward_kinematics.
Mat2 leg_jacobian(const JointState& q, const LegParams& params);

/// tau = -Kp (q - q_des) - Kd (q_dot - q_dot_des)
Vec2 swing_pd_torque(const JointState& state, const JointState& desired,
                     const LegParams& params);

/// tau = J^T f
Vec2 stance_torque(const JointState& q, const Vec2& f, const LegParams& params);

}  // namespace kquad
