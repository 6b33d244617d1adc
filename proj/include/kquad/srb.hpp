#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace kquad {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat2 = Eigen::Matrix2d;

/// Planar single-rigid-body state: CoM position/velocity in world frame,
/// pitch angle (world) and pitch rate (body).
struct SrbState {
  Vec2 p{0.0, 0.0};
  double theta{0.0};
  Vec2 p_dot{0.0, 0.0};
  double theta_dot{0.0};

  Vec6 to_vector() const;
  static SrbState from_vector(const Vec6& v);
  bool all_finite() const;
};

struct SrbParams {
  double m{12.0};        // torso mass [kg]
  double inertia{0.42};  // pitch inertia [kg m^2]
  Vec2 g{0.0, 9.81};     // gravity vector, world frame
  Vec4 u_min{-150.0, 0.0, -150.0, 0.0};
  Vec4 u_max{150.0, 250.0, 150.0, 250.0};

  void validate() const {
    if (!(m > 0.0)) throw std::invalid_argument("SrbParams: m must be > 0");
    if (!(inertia > 0.0)) throw std::invalid_argument("SrbParams: I must be > 0");
    if ((u_min.array() > u_max.array()).any())
      throw std::invalid_argument("SrbParams: u_min must be <= u_max");
  }
};

/// Contact mode selecting which foot pairs carry load.
/// Mode scalars (alpha_i, alpha_j): Trot (1,1), FrontStance (2,0),
/// RearStance (0,2), Flight (0,0).
enum class ContactMode { Trot, FrontStance, RearStance, Flight };

struct ModeScalars {
  double alpha_i;
  double alpha_j;
};

ModeScalars mode_scalars(ContactMode mode);
const char* mode_name(ContactMode mode);
ContactMode mode_from_name(const std::string& name);

/// Ground reaction forces (body frame) and foot-to-CoM moment arms.
struct ControlInput {
  Vec2 F_i{0.0, 0.0};
  Vec2 F_j{0.0, 0.0};
  Vec2 r_i{0.0, 0.0};
  Vec2 r_j{0.0, 0.0};

  Vec4 forces() const { return Vec4{F_i.x(), F_i.y(), F_j.x(), F_j.y()}; }
};

/// Rotation matrix mapping body-frame vectors into the world frame.
Mat2 rotation_matrix(double theta);

/// Planar cross product a_x*b_z - a_z*b_x.
inline double cross2(const Vec2& a, const Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

/// Time derivative of the SRB state under the given contact mode.
SrbState continuous_dynamics(const SrbState& x, const ControlInput& u,
                             ContactMode mode, const SrbParams& params);

/// Classical fixed-step RK4 update holding u and mode constant over dt.
SrbState rk4_step(const SrbState& x, const ControlInput& u, ContactMode mode,
                  const SrbParams& params, double dt);

/// Rollout of len(u_seq) RK4 steps; returns len(u_seq)+1 states including x0.
/// Throws std::runtime_error if any state component diverges (|.| > 1e6) or
/// becomes non-finite.
std::vector<SrbState> rollout(const SrbState& x0,
                              const std::vector<ControlInput>& u_seq,
                              ContactMode mode, const SrbParams& params,
                              double dt);

/// Wrap an angle to (-pi, pi]; used only at reporting boundaries.
double wrap_angle(double theta);

}  // namespace kquad
