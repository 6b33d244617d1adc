#include "kquad/harness.hpp"

#include <cmath>

namespace kquad {

namespace {

constexpr int kLegStancePhaseBound[4] = {0, 0, 2, 2};  // FR, FL, RR, RL

bool is_front(int leg) { return leg < 2; }

double swing_duration(const FsmState& fsm, const GaitSchedule& sch, int leg) {
  if (fsm.gait == GaitType::Trot) return sch.trot_half_period;
  const int stance_phase = kLegStancePhaseBound[leg];
  double total = 0.0;
  int p = fsm.phase;
  for (int guard = 0; guard < 4 && p != stance_phase; ++guard) {
    total += sch.bound_durations[static_cast<std::size_t>(p)];
    p = (p + 1) % 4;
  }
  return total > 0.0 ? total : sch.bound_durations[0];
}

// IK with the target projected into the reachable annulus; transient
// tracking errors can push foot targets slightly out of workspace and the
// logged torques should stay finite rather than abort the run.
JointState safe_ik(Vec2 rel, const LegParams& leg) {
  const double r_max = leg.l1 + leg.l2 - 1e-9;
  const double r_min = std::abs(leg.l1 - leg.l2) + 1e-9;
  const double r = rel.norm();
  if (r > r_max) rel *= r_max / r;
  if (r < r_min) rel = r > 1e-12 ? Vec2(rel * (r_min / r)) : Vec2(0.0, -r_min);
  return analytic_ik(rel, leg);
}

struct LegTracker {
  Vec2 pos{0.0, 0.0};
  Vec2 swing_start{0.0, 0.0};
  Vec2 swing_target{0.0, 0.0};
  double swing_clock{0.0};
  double swing_dur{1.0};
  bool in_stance{true};
  std::optional<Vec2> held;
};

}  // namespace

RunLog run_closed_loop(const SimConfig& config, const ModelSet& models) {
  const ControllerConfig& ctrl = config.ctrl;
  const ScenarioConfig& scen = config.scenario;
  config.srb.validate();
  config.schedule.validate();

  TerrainProfile terrain;
  if (scen.rough_terrain)
    terrain = make_rough_terrain(scen.terrain_seed);

  // One condensed solver per stance mode the scenario can reach; bounds and
  // weights per active gait.
  const auto make_solver = [&](ContactMode mode, const Vec6& Q, const Vec4& R,
                               const Vec4& lo,
                               const Vec4& up) -> std::optional<MpcSolver> {
    const auto it = models.find(mode);
    if (it == models.end()) return std::nullopt;
    MpcConfig mc = config.mpc;
    mc.Q_diag = Q;
    mc.R_diag = R;
    mc.u_min = lo;
    mc.u_max = up;
    return MpcSolver(it->second, mc);
  };
  const auto trot_solver =
      make_solver(ContactMode::Trot, ctrl.trot_Q, ctrl.trot_R, ctrl.trot_u_min,
                  ctrl.trot_u_max);
  const auto front_solver =
      make_solver(ContactMode::FrontStance, ctrl.bound_Q, ctrl.bound_R,
                  ctrl.bound_u_min, ctrl.bound_u_max);
  const auto rear_solver =
      make_solver(ContactMode::RearStance, ctrl.bound_Q, ctrl.bound_R,
                  ctrl.bound_u_min, ctrl.bound_u_max);
  const auto require = [&](const std::optional<MpcSolver>& s,
                           ContactMode mode) -> const MpcSolver& {
    if (!s)
      throw std::runtime_error(
          std::string("run_closed_loop: missing model for mode ") +
          mode_name(mode));
    return *s;
  };

  FsmState fsm;
  fsm.gait = scen.gait;
  fsm.phase = 0;
  fsm.contact = scen.gait == GaitType::Trot
                    ? std::array<bool, 4>{true, false, false, true}
                    : std::array<bool, 4>{true, true, false, false};

  SrbState x;
  x.p = Vec2{0.0, ctrl.z_nom};

  const auto hip_x_eff = [&](GaitType gait) {
    return gait == GaitType::Bound ? ctrl.hip_x - ctrl.s_in : ctrl.hip_x;
  };
  std::array<LegTracker, 4> legs;
  for (int i = 0; i < 4; ++i) {
    const double hx = (is_front(i) ? 1.0 : -1.0) * hip_x_eff(scen.gait);
    legs[static_cast<std::size_t>(i)].pos =
        Vec2{hx, terrain.height_at(hx)};
    legs[static_cast<std::size_t>(i)].in_stance =
        fsm.contact[static_cast<std::size_t>(i)];
  }
  // Plant anchors: last placed stance position per virtual foot.
  Vec2 foot_f = legs[kFR].pos;
  Vec2 foot_r = legs[kRR].pos;

  const double dt = config.dt_plant;
  const double dt_c = dt * config.control_every;
  const int n_steps = static_cast<int>(std::round(scen.duration / dt));

  RunLog log;
  log.records.reserve(static_cast<std::size_t>(n_steps / config.control_every) +
                      1);
  Vec4 u = Vec4::Zero();
  std::array<double, 8> tau{};
  double ref_px = 0.0;
  double vx_f = 0.0;
  bool transition_sent = false;
  std::vector<bool> slip_marked(scen.slips.size(), false);
  bool qp_dumped = false;
  QpSolution qp_diag;
  Vec6 reference = Vec6::Zero();
  ContactMode mode = fsm.contact_mode();

  const auto place = [&](int leg_idx, double t) {
    const double v_des = scen.vx_command(t);
    SrbState xs = x;
    double kv = ctrl.kv_trot;
    double T_st = config.schedule.trot_half_period;
    if (fsm.gait == GaitType::Bound) {
      xs.p_dot.x() = vx_f;  // bound placement uses the filtered velocity
      kv = ctrl.kv_bound;
      T_st = config.schedule.bound_durations[0];
    }
    const Vec2 hip{(is_front(leg_idx) ? 1.0 : -1.0) * hip_x_eff(fsm.gait), 0.0};
    return raibert_foot_placement(xs, hip, v_des, T_st, kv, terrain).position;
  };

  for (int s = 0; s < n_steps; ++s) {
    const double t = s * dt;
    const double vx_cmd = scen.vx_command(t);

    if (s % config.control_every == 0) {
      std::string event;
      vx_f += ctrl.ema_alpha * (x.p_dot.x() - vx_f);

      if (scen.is_transition && !transition_sent &&
          t + dt_c >= scen.transition_time) {
        handle_transition(fsm, scen.transition_target);
        transition_sent = true;
      }

      const FsmStep step = fsm_advance(fsm, dt_c, config.schedule);
      mode = step.mode;
      if (step.gait_changed) event = "switch";

      if (step.phase_changed) {
        for (int i = 0; i < 4; ++i) {
          auto& leg = legs[static_cast<std::size_t>(i)];
          const bool stance_now = fsm.contact[static_cast<std::size_t>(i)];
          if (stance_now && !leg.in_stance) {
            leg.pos = leg.held ? *leg.held : place(i, t);
            leg.held.reset();
            if (is_front(i))
              foot_f = leg.pos;
            else
              foot_r = leg.pos;
          } else if (!stance_now && leg.in_stance) {
            leg.swing_start = leg.pos;
            leg.swing_target = place(i, t);
            leg.swing_clock = 0.0;
            leg.swing_dur = swing_duration(fsm, config.schedule, i);
          } else if (stance_now && leg.in_stance && step.gait_changed) {
            // Re-anchor on a gait switch so the new stance geometry applies.
            leg.pos = place(i, t);
            if (is_front(i))
              foot_f = leg.pos;
            else
              foot_r = leg.pos;
          }
          leg.in_stance = stance_now;
        }
      }

      // Swing feet follow their arcs; latched holds freeze them. The
      // simulated contact sensor only fires on descending feet so a foot
      // lifting off a block does not re-trigger on its own takeoff edge.
      std::array<Vec2, 4> foot_pos;
      std::array<bool, 4> check_mask = fsm.contact;  // true = skip check
      for (int i = 0; i < 4; ++i) {
        auto& leg = legs[static_cast<std::size_t>(i)];
        if (!leg.in_stance) {
          leg.swing_clock += dt_c;
          const double frac =
              std::min(leg.swing_clock / leg.swing_dur, 1.0);
          const SwingTarget st =
              swing_trajectory(leg.swing_start, leg.swing_target, frac,
                               ctrl.swing_apex, leg.swing_dur, leg.held);
          leg.pos = st.position;
          if (st.velocity.y() >= 0.0)
            check_mask[static_cast<std::size_t>(i)] = true;
        }
        foot_pos[static_cast<std::size_t>(i)] = leg.pos;
      }
      const auto holds =
          contact_obstacle_check(foot_pos, terrain, check_mask, fsm.hold);
      for (int i = 0; i < 4; ++i) {
        auto& leg = legs[static_cast<std::size_t>(i)];
        if (holds[static_cast<std::size_t>(i)] &&
            !fsm.hold[static_cast<std::size_t>(i)]) {
          // Early touchdown: settle the held foot onto the terrain surface.
          leg.held = Vec2{leg.pos.x(), terrain.height_at(leg.pos.x())};
          leg.pos = *leg.held;
          if (event.empty()) event = "hold";
        }
      }
      fsm.hold = holds;

      double vzr = 0.0;
      const double zt = ctrl.z_nom + 0.5 * (foot_f.y() + foot_r.y());
      if (mode != ContactMode::Flight) {
        ref_px += vx_cmd * dt_c;
        if (fsm.gait == GaitType::Bound)
          vzr = ctrl.vz_takeoff + ctrl.kz * (zt - x.p.y());
        reference << ref_px, zt, 0.0, vx_cmd, vzr, 0.0;
        ReferenceTrajectory ref(static_cast<std::size_t>(config.mpc.k),
                                SrbState::from_vector(reference));
        const MpcSolver* solver = nullptr;
        Vec4 lo, up;
        if (mode == ContactMode::FrontStance) {
          solver = &require(front_solver, ContactMode::FrontStance);
          lo = ctrl.bound_u_min;
          up = ctrl.bound_u_max;
          lo[2] = lo[3] = up[2] = up[3] = 0.0;  // rear pair airborne
        } else if (mode == ContactMode::RearStance) {
          solver = &require(rear_solver, ContactMode::RearStance);
          lo = ctrl.bound_u_min;
          up = ctrl.bound_u_max;
          lo[0] = lo[1] = up[0] = up[1] = 0.0;  // front pair airborne
        } else {
          solver = &require(trot_solver, ContactMode::Trot);
          lo = ctrl.trot_u_min;
          up = ctrl.trot_u_max;
        }
        const MpcResult res = solver->step(x, ref, lo, up);
        u = res.qp.u.head<4>();
        qp_diag = res.qp;
        if (config.dump_qp && !qp_dumped) {
          Eigen::MatrixXd H;
          Eigen::VectorXd P;
          MpcConfig mc = config.mpc;
          mc.Q_diag = fsm.gait == GaitType::Bound ? ctrl.bound_Q : ctrl.trot_Q;
          mc.R_diag = fsm.gait == GaitType::Bound ? ctrl.bound_R : ctrl.trot_R;
          build_cost(solver->A_qp(), solver->B_qp(),
                     lift(x, solver->model().config), ref, mc, H, P);
          Eigen::VectorXd lo_full(4 * config.mpc.k), up_full(4 * config.mpc.k);
          for (int i = 0; i < config.mpc.k; ++i) {
            lo_full.segment<4>(4 * i) = lo;
            up_full.segment<4>(4 * i) = up;
          }
          dump_qp_instance(H, P, lo_full, up_full, res.qp,
                           config.output_dir + "/qp_instance.json");
          qp_dumped = true;
        }
      } else {
        u = Vec4::Zero();
        reference << ref_px, zt, 0.0, vx_cmd, 0.0, 0.0;
        qp_diag = QpSolution{};
      }

      // Scripted slip disturbances: brief force reduction.
      for (std::size_t i = 0; i < scen.slips.size(); ++i) {
        const auto& sl = scen.slips[i];
        if (t >= sl.t && t < sl.t + sl.duration) {
          u *= sl.scale;
          if (!slip_marked[i]) {
            slip_marked[i] = true;
            if (event.empty()) event = "slip";
          }
        }
      }

      // Joint torques, logged only (the plant consumes forces directly).
      const Mat2 Rw = rotation_matrix(x.theta);
      for (int i = 0; i < 4; ++i) {
        auto& leg = legs[static_cast<std::size_t>(i)];
        const Vec2 hip_world =
            x.p + Rw * Vec2{(is_front(i) ? 1.0 : -1.0) * hip_x_eff(fsm.gait),
                            0.0};
        const Vec2 rel = Rw.transpose() * (leg.pos - hip_world);
        const JointState q = safe_ik(rel, config.leg);
        Vec2 torque;
        if (leg.in_stance && mode != ContactMode::Flight) {
          const Vec2 f = is_front(i) ? Vec2{u[0], u[1]} : Vec2{u[2], u[3]};
          torque = stance_torque(q, f, config.leg);
        } else {
          const Vec2 rel_des =
              Rw.transpose() * (leg.swing_target - hip_world);
          const JointState q_des = safe_ik(rel_des, config.leg);
          torque = swing_pd_torque(q, q_des, config.leg);
        }
        tau[static_cast<std::size_t>(2 * i)] = torque[0];
        tau[static_cast<std::size_t>(2 * i + 1)] = torque[1];
      }

      RunRecord rec;
      rec.t = t;
      rec.state = x.to_vector();
      rec.reference = reference;
      rec.gait = fsm.gait;
      rec.phase = fsm.phase;
      rec.mode = mode;
      rec.contact = fsm.contact;
      rec.forces = u;
      rec.tau = tau;
      rec.qp_objective = qp_diag.objective;
      rec.qp_kkt = qp_diag.kkt_residual;
      rec.qp_ms = qp_diag.solve_time_ms;
      rec.event = event;
      log.records.push_back(std::move(rec));
    }

    ControlInput plant_u;
    plant_u.F_i = Vec2{u[0], u[1]};
    plant_u.F_j = Vec2{u[2], u[3]};
    const Mat2 Rw = rotation_matrix(x.theta);
    plant_u.r_i = Rw.transpose() * (foot_f - x.p);
    plant_u.r_j = Rw.transpose() * (foot_r - x.p);
    x = rk4_step(x, plant_u, mode, config.srb, dt);

    if (std::abs(x.theta) > 0.8 ||
        x.p.y() < terrain.height_at(x.p.x()) + 0.05) {
      RunRecord rec;
      rec.t = (s + 1) * dt;
      rec.state = x.to_vector();
      rec.reference = reference;
      rec.gait = fsm.gait;
      rec.phase = fsm.phase;
      rec.mode = mode;
      rec.contact = fsm.contact;
      rec.forces = u;
      rec.tau = tau;
      rec.event = "fall";
      log.fell = true;
      log.fall_time = rec.t;
      log.records.push_back(std::move(rec));
      return log;
    }
  }
  return log;
}

RunLog run_transition_scenario(const SimConfig& config,
                               const ModelSet& models) {
  SimConfig c = config;
  c.scenario.is_transition = true;
  if (c.scenario.duration <= 0.0) c.scenario.duration = 6.0;
  return run_closed_loop(c, models);
}

}  // namespace kquad
