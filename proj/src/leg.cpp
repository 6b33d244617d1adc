#include "kquad/leg.hpp"

#include <cmath>

namespace kquad {

// Zero configuration points straight down; positive angles swing the foot
// toward -x. Link direction for angle a is (-sin a, -cos a).
Vec2 forward_kinematics(const JointState& q, const LegParams& params) {
  params.validate();
  const double q1 = q.q[0];
  const double q12 = q.q[0] + q.q[1];
  return Vec2{-params.l1 * std::sin(q1) - params.l2 * std::sin(q12),
              -params.l1 * std::cos(q1) - params.l2 * std::cos(q12)};
}

JointState analytic_ik(const Vec2& foot, const LegParams& params) {
  params.validate();
  const double r = foot.norm();
  const double r_min = std::abs(params.l1 - params.l2);
  const double r_max = params.l1 + params.l2;
  if (r < r_min - 1e-12 || r > r_max + 1e-12)
    throw WorkspaceError("analytic_ik: target at distance " +
                         std::to_string(r) + " outside reachable annulus [" +
                         std::to_string(r_min) + ", " + std::to_string(r_max) +
                         "]");
  double c2 = (r * r - params.l1 * params.l1 - params.l2 * params.l2) /
              (2.0 * params.l1 * params.l2);
  c2 = std::clamp(c2, -1.0, 1.0);
  const double q2 = -std::acos(c2);  // knee-back branch
  const double phi = std::atan2(-foot.x(), -foot.y());
  const double beta =
      std::atan2(params.l2 * std::sin(q2), params.l1 + params.l2 * c2);
  JointState out;
  out.q = Vec2{phi - beta, q2};
  out.q_dot.setZero();
  return out;
}

Mat2 leg_jacobian(const JointState& q, const LegParams& params) {
  params.validate();
  const double c1 = std::cos(q.q[0]);
  const double s1 = std::sin(q.q[0]);
  const double c12 = std::cos(q.q[0] + q.q[1]);
  const double s12 = std::sin(q.q[0] + q.q[1]);
  Mat2 J;
  J << -params.l1 * c1 - params.l2 * c12, -params.l2 * c12,
       params.l1 * s1 + params.l2 * s12, params.l2 * s12;
  return J;
}

Vec2 swing_pd_torque(const JointState& state, const JointState& desired,
                     const LegParams& params) {
  return -params.Kp * (state.q - desired.q) -
         params.Kd * (state.q_dot - desired.q_dot);
}

Vec2 stance_torque(const JointState& q, const Vec2& f,
                   const LegParams& params) {
  return leg_jacobian(q, params).transpose() * f;
}

}  // namespace kquad
