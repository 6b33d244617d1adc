#include "kquad/srb.hpp"

#include <cmath>

namespace kquad {

Vec6 SrbState::to_vector() const {
  Vec6 v;
  v << p.x(), p.y(), theta, p_dot.x(), p_dot.y(), theta_dot;
  return v;
}

SrbState SrbState::from_vector(const Vec6& v) {
  SrbState s;
  s.p = Vec2{v[0], v[1]};
  s.theta = v[2];
  s.p_dot = Vec2{v[3], v[4]};
  s.theta_dot = v[5];
  return s;
}

bool SrbState::all_finite() const {
  return to_vector().allFinite();
}

ModeScalars mode_scalars(ContactMode mode) {
  switch (mode) {
    case ContactMode::Trot:        return {1.0, 1.0};
    case ContactMode::FrontStance: return {2.0, 0.0};
    case ContactMode::RearStance:  return {0.0, 2.0};
    case ContactMode::Flight:      return {0.0, 0.0};
  }
  throw std::logic_error("invalid ContactMode");
}

const char* mode_name(ContactMode mode) {
  switch (mode) {
    case ContactMode::Trot:        return "trot";
    case ContactMode::FrontStance: return "front";
    case ContactMode::RearStance:  return "rear";
    case ContactMode::Flight:      return "flight";
  }
  return "?";
}

ContactMode mode_from_name(const std::string& name) {
  if (name == "trot") return ContactMode::Trot;
  if (name == "front") return ContactMode::FrontStance;
  if (name == "rear") return ContactMode::RearStance;
  if (name == "flight") return ContactMode::Flight;
  throw std::invalid_argument("unknown contact mode name: " + name);
}

Mat2 rotation_matrix(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Mat2 R;
  R << c, -s, s, c;
  return R;
}

SrbState continuous_dynamics(const SrbState& x, const ControlInput& u,
                             ContactMode mode, const SrbParams& params) {
  const auto [ai, aj] = mode_scalars(mode);
  const Vec2 f_total = ai * u.F_i + aj * u.F_j;
  SrbState dx;
  dx.p = x.p_dot;
  dx.theta = x.theta_dot;
  dx.p_dot = rotation_matrix(x.theta) * f_total / params.m - params.g;
  dx.theta_dot =
      (cross2(u.r_i, ai * u.F_i) + cross2(u.r_j, aj * u.F_j)) / params.inertia;
  return dx;
}

namespace {

SrbState axpy(const SrbState& x, double a, const SrbState& d) {
  SrbState r;
  r.p = x.p + a * d.p;
  r.theta = x.theta + a * d.theta;
  r.p_dot = x.p_dot + a * d.p_dot;
  r.theta_dot = x.theta_dot + a * d.theta_dot;
  return r;
}

}  // namespace

SrbState rk4_step(const SrbState& x, const ControlInput& u, ContactMode mode,
                  const SrbParams& params, double dt) {
  const SrbState k1 = continuous_dynamics(x, u, mode, params);
  const SrbState k2 = continuous_dynamics(axpy(x, dt / 2, k1), u, mode, params);
  const SrbState k3 = continuous_dynamics(axpy(x, dt / 2, k2), u, mode, params);
  const SrbState k4 = continuous_dynamics(axpy(x, dt, k3), u, mode, params);
  SrbState y = x;
  y.p += dt / 6.0 * (k1.p + 2 * k2.p + 2 * k3.p + k4.p);
  y.theta += dt / 6.0 * (k1.theta + 2 * k2.theta + 2 * k3.theta + k4.theta);
  y.p_dot += dt / 6.0 * (k1.p_dot + 2 * k2.p_dot + 2 * k3.p_dot + k4.p_dot);
  y.theta_dot +=
      dt / 6.0 * (k1.theta_dot + 2 * k2.theta_dot + 2 * k3.theta_dot + k4.theta_dot);
  return y;
}

std::vector<SrbState> rollout(const SrbState& x0,
                              const std::vector<ControlInput>& u_seq,
                              ContactMode mode, const SrbParams& params,
                              double dt) {
  if (u_seq.empty()) throw std::invalid_argument("rollout: empty input sequence");
  std::vector<SrbState> out;
  out.reserve(u_seq.size() + 1);
  out.push_back(x0);
  for (const auto& u : u_seq) {
    SrbState next = rk4_step(out.back(), u, mode, params, dt);
    const Vec6 v = next.to_vector();
    if (!v.allFinite() || v.cwiseAbs().maxCoeff() > 1e6)
      throw std::runtime_error("rollout: state diverged");
    out.push_back(next);
  }
  return out;
}

double wrap_angle(double theta) {
  double w = std::fmod(theta + M_PI, 2.0 * M_PI);
  if (w <= 0.0) w += 2.0 * M_PI;
  return w - M_PI;
}

}  // namespace kquad
