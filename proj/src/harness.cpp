#include "kquad/harness.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace kquad {

double ScenarioConfig::vx_command(double t) const {
  double v = 0.0;
  for (const auto& s : script)
    if (t >= s.t) v = s.vx;
  return v;
}

ScenarioConfig make_scenario(const std::string& name) {
  ScenarioConfig s;
  s.name = name;
  if (name == "trot-steps") {
    s.gait = GaitType::Trot;
    s.script = {{0.0, 0.0}, {2.5, 0.1}, {5.0, 0.3}, {7.5, 0.2}, {10.0, 0.0}};
    s.duration = 12.5;
  } else if (name == "bound-steps") {
    s.gait = GaitType::Bound;
    s.script = {{0.0, 0.0}, {2.0, 0.1}, {5.0, 0.8}, {8.0, 0.3}, {11.0, 0.0}};
    s.duration = 14.0;
  } else if (name == "trot-terrain") {
    s.gait = GaitType::Trot;
    s.script = {{0.0, 0.3}};
    s.duration = 18.0;
    s.rough_terrain = true;
  } else if (name == "bound-terrain") {
    s.gait = GaitType::Bound;
    s.script = {{0.0, 0.75}};
    s.duration = 10.0;
    s.rough_terrain = true;
  } else if (name == "trot-to-bound") {
    s.gait = GaitType::Trot;
    s.script = {{0.0, 0.0}};
    s.duration = 6.0;
    s.is_transition = true;
    s.transition_target = GaitType::Bound;
    s.transition_time = 3.0;
  } else if (name == "bound-to-trot") {
    s.gait = GaitType::Bound;
    s.script = {{0.0, 0.0}};
    s.duration = 6.0;
    s.is_transition = true;
    s.transition_target = GaitType::Trot;
    s.transition_time = 3.0;
  } else if (name == "trot-regulation") {
    s.gait = GaitType::Trot;
    s.script = {{0.0, 0.0}};
    s.duration = 5.0;
  } else {
    throw std::invalid_argument("unknown scenario: " + name);
  }
  return s;
}

SimConfig default_sim_config() {
  SimConfig c;
  c.config_json = sim_config_to_json(c);
  return c;
}

namespace {

using nlohmann::json;

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

template <typename Vec>
void vec_from_json(const json& j, Vec& v) {
  const auto a = j.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(a.size()) != v.size())
    throw std::invalid_argument("config: vector length mismatch");
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = a[static_cast<std::size_t>(i)];
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

template <typename Vec>
void maybe_vec(const json& j, const char* key, Vec& out) {
  if (j.contains(key)) vec_from_json(j.at(key), out);
}

}  // namespace

std::string sim_config_to_json(const SimConfig& c) {
  json j;
  j["srb"] = {{"m", c.srb.m},
              {"inertia", c.srb.inertia},
              {"g", to_std(c.srb.g)},
              {"u_min", to_std(c.srb.u_min)},
              {"u_max", to_std(c.srb.u_max)}};
  j["observables"] = {{"p_order", c.observables.p_order}};
  j["mpc"] = {{"k", c.mpc.k}, {"dt_mpc", c.mpc.dt_mpc}};
  j["schedule"] = {{"trot_half_period", c.schedule.trot_half_period},
                   {"bound_durations",
                    std::vector<double>(c.schedule.bound_durations.begin(),
                                        c.schedule.bound_durations.end())}};
  j["leg"] = {{"l1", c.leg.l1}, {"l2", c.leg.l2}};
  j["controller"] = {{"z_nom", c.ctrl.z_nom},
                     {"hip_x", c.ctrl.hip_x},
                     {"kv_trot", c.ctrl.kv_trot},
                     {"kv_bound", c.ctrl.kv_bound},
                     {"ema_alpha", c.ctrl.ema_alpha},
                     {"s_in", c.ctrl.s_in},
                     {"vz_takeoff", c.ctrl.vz_takeoff},
                     {"kz", c.ctrl.kz},
                     {"swing_apex", c.ctrl.swing_apex},
                     {"trot_Q", to_std(c.ctrl.trot_Q)},
                     {"trot_R", to_std(c.ctrl.trot_R)},
                     {"bound_Q", to_std(c.ctrl.bound_Q)},
                     {"bound_R", to_std(c.ctrl.bound_R)},
                     {"trot_u_min", to_std(c.ctrl.trot_u_min)},
                     {"trot_u_max", to_std(c.ctrl.trot_u_max)},
                     {"bound_u_min", to_std(c.ctrl.bound_u_min)},
                     {"bound_u_max", to_std(c.ctrl.bound_u_max)}};
  j["training"] = {{"n_rollouts", c.training.n_rollouts},
                   {"rollout_len", c.training.rollout_len},
                   {"dt", c.training.dt},
                   {"p_range", c.training.p_range},
                   {"theta_range", c.training.theta_range},
                   {"v_range", c.training.v_range},
                   {"theta_dot_range", c.training.theta_dot_range},
                   {"fz_lo", c.training.fz_lo},
                   {"fz_hi", c.training.fz_hi},
                   {"fx_jitter", c.training.fx_jitter},
                   {"arm_x", c.training.arm_x},
                   {"arm_z", c.training.arm_z}};
  json script = json::array();
  for (const auto& st : c.scenario.script) script.push_back({st.t, st.vx});
  json slips = json::array();
  for (const auto& sl : c.scenario.slips)
    slips.push_back({sl.t, sl.duration, sl.scale});
  j["scenario"] = {{"name", c.scenario.name},
                   {"gait", gait_name(c.scenario.gait)},
                   {"script", script},
                   {"duration", c.scenario.duration},
                   {"rough_terrain", c.scenario.rough_terrain},
                   {"terrain_seed", c.scenario.terrain_seed},
                   {"is_transition", c.scenario.is_transition},
                   {"transition_target", gait_name(c.scenario.transition_target)},
                   {"transition_time", c.scenario.transition_time},
                   {"slips", slips}};
  j["seed"] = c.seed;
  j["dt_plant"] = c.dt_plant;
  j["control_every"] = c.control_every;
  j["dump_qp"] = c.dump_qp;
  j["output_dir"] = c.output_dir;
  return j.dump(1);
}

SimConfig load_sim_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_sim_config: cannot open " + path);
  json j;
  try {
    is >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("load_sim_config: malformed JSON in " + path +
                             ": " + e.what());
  }
  SimConfig c;
  try {
    if (j.contains("srb")) {
      const auto& s = j["srb"];
      maybe(s, "m", c.srb.m);
      maybe(s, "inertia", c.srb.inertia);
      maybe_vec(s, "g", c.srb.g);
      maybe_vec(s, "u_min", c.srb.u_min);
      maybe_vec(s, "u_max", c.srb.u_max);
    }
    if (j.contains("observables"))
      maybe(j["observables"], "p_order", c.observables.p_order);
    if (j.contains("mpc")) {
      maybe(j["mpc"], "k", c.mpc.k);
      maybe(j["mpc"], "dt_mpc", c.mpc.dt_mpc);
    }
    if (j.contains("schedule")) {
      const auto& s = j["schedule"];
      maybe(s, "trot_half_period", c.schedule.trot_half_period);
      if (s.contains("bound_durations")) {
        const auto a = s["bound_durations"].get<std::vector<double>>();
        if (a.size() != 4)
          throw std::invalid_argument("config: bound_durations needs 4 values");
        std::copy(a.begin(), a.end(), c.schedule.bound_durations.begin());
      }
    }
    if (j.contains("leg")) {
      maybe(j["leg"], "l1", c.leg.l1);
      maybe(j["leg"], "l2", c.leg.l2);
    }
    if (j.contains("controller")) {
      const auto& t = j["controller"];
      maybe(t, "z_nom", c.ctrl.z_nom);
      maybe(t, "hip_x", c.ctrl.hip_x);
      maybe(t, "kv_trot", c.ctrl.kv_trot);
      maybe(t, "kv_bound", c.ctrl.kv_bound);
      maybe(t, "ema_alpha", c.ctrl.ema_alpha);
      maybe(t, "s_in", c.ctrl.s_in);
      maybe(t, "vz_takeoff", c.ctrl.vz_takeoff);
      maybe(t, "kz", c.ctrl.kz);
      maybe(t, "swing_apex", c.ctrl.swing_apex);
      maybe_vec(t, "trot_Q", c.ctrl.trot_Q);
      maybe_vec(t, "trot_R", c.ctrl.trot_R);
      maybe_vec(t, "bound_Q", c.ctrl.bound_Q);
      maybe_vec(t, "bound_R", c.ctrl.bound_R);
      maybe_vec(t, "trot_u_min", c.ctrl.trot_u_min);
      maybe_vec(t, "trot_u_max", c.ctrl.trot_u_max);
      maybe_vec(t, "bound_u_min", c.ctrl.bound_u_min);
      maybe_vec(t, "bound_u_max", c.ctrl.bound_u_max);
    }
    if (j.contains("training")) {
      const auto& t = j["training"];
      maybe(t, "n_rollouts", c.training.n_rollouts);
      maybe(t, "rollout_len", c.training.rollout_len);
      maybe(t, "dt", c.training.dt);
      maybe(t, "p_range", c.training.p_range);
      maybe(t, "theta_range", c.training.theta_range);
      maybe(t, "v_range", c.training.v_range);
      maybe(t, "theta_dot_range", c.training.theta_dot_range);
      maybe(t, "fz_lo", c.training.fz_lo);
      maybe(t, "fz_hi", c.training.fz_hi);
      maybe(t, "fx_jitter", c.training.fx_jitter);
      maybe(t, "arm_x", c.training.arm_x);
      maybe(t, "arm_z", c.training.arm_z);
    }
    if (j.contains("scenario")) {
      const auto& s = j["scenario"];
      if (s.contains("name") && !s.contains("script")) {
        c.scenario = make_scenario(s["name"].get<std::string>());
      } else if (s.contains("name")) {
        c.scenario.name = s["name"].get<std::string>();
      }
      if (s.contains("gait"))
        c.scenario.gait = gait_from_name(s["gait"].get<std::string>());
      if (s.contains("script")) {
        c.scenario.script.clear();
        for (const auto& row : s["script"])
          c.scenario.script.push_back(
              {row.at(0).get<double>(), row.at(1).get<double>()});
      }
      maybe(s, "duration", c.scenario.duration);
      maybe(s, "rough_terrain", c.scenario.rough_terrain);
      maybe(s, "terrain_seed", c.scenario.terrain_seed);
      maybe(s, "is_transition", c.scenario.is_transition);
      if (s.contains("transition_target"))
        c.scenario.transition_target =
            gait_from_name(s["transition_target"].get<std::string>());
      maybe(s, "transition_time", c.scenario.transition_time);
      if (s.contains("slips")) {
        c.scenario.slips.clear();
        for (const auto& row : s["slips"])
          c.scenario.slips.push_back({row.at(0).get<double>(),
                                      row.at(1).get<double>(),
                                      row.at(2).get<double>()});
      }
    }
    maybe(j, "seed", c.seed);
    maybe(j, "dt_plant", c.dt_plant);
    maybe(j, "control_every", c.control_every);
    maybe(j, "dump_qp", c.dump_qp);
    maybe(j, "output_dir", c.output_dir);
  } catch (const json::exception& e) {
    throw std::runtime_error("load_sim_config: bad field in " + path + ": " +
                             e.what());
  }
  c.config_json = sim_config_to_json(c);
  return c;
}

namespace {

// Seeded uniform draws decoupled from the standard library's distribution
// implementations so logs are reproducible bit-for-bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) {
    const double u01 =
        static_cast<double>(gen_() >> 11) * 0x1.0p-53;  // [0, 1)
    return lo + (hi - lo) * u01;
  }

 private:
  std::mt19937_64 gen_;
};

// Forces pointing through the CoM from the nominal arm, plus horizontal
// jitter: keeps snapshots in the force regime the closed loop visits while
// leaving the torque channel identifiable.
Vec2 sample_force(Rng& rng, const Vec2& arm, const TrainingConfig& tc) {
  const double fz = rng.uniform(tc.fz_lo, tc.fz_hi);
  const double fx =
      (arm.x() / arm.y()) * fz + rng.uniform(-tc.fx_jitter, tc.fx_jitter);
  return Vec2{fx, fz};
}

SrbState sample_initial_state(Rng& rng, const TrainingConfig& tc) {
  SrbState x;
  x.p = Vec2{rng.uniform(-tc.p_range, tc.p_range),
             rng.uniform(-tc.p_range, tc.p_range)};
  x.theta = rng.uniform(-tc.theta_range, tc.theta_range);
  x.p_dot = Vec2{rng.uniform(-tc.v_range, tc.v_range),
                 rng.uniform(-tc.v_range, tc.v_range)};
  x.theta_dot = rng.uniform(-tc.theta_dot_range, tc.theta_dot_range);
  return x;
}

}  // namespace

SnapshotSet generate_training_data(const SrbParams& params,
                                   const TrainingConfig& training,
                                   ContactMode mode, std::uint64_t seed,
                                   int* redrawn) {
  if (training.n_rollouts < 1)
    throw std::invalid_argument("generate_training_data: n_rollouts >= 1");
  params.validate();
  Rng rng(seed);
  const Vec2 arm_i{training.arm_x, -training.arm_z};
  const Vec2 arm_j{-training.arm_x, -training.arm_z};
  const bool flight = mode == ContactMode::Flight;

  SnapshotSet data;
  data.mode = mode;
  data.dt = training.dt;
  int redraw_count = 0;
  int done = 0;
  while (done < training.n_rollouts) {
    SrbState x = sample_initial_state(rng, training);
    std::vector<Vec6> xs, ys;
    std::vector<Vec4> us;
    bool diverged = false;
    for (int s = 0; s < training.rollout_len; ++s) {
      ControlInput u;
      u.r_i = arm_i;
      u.r_j = arm_j;
      if (!flight) {
        u.F_i = sample_force(rng, arm_i, training);
        u.F_j = sample_force(rng, arm_j, training);
      }
      const SrbState y = rk4_step(x, u, mode, params, training.dt);
      if (!y.all_finite() || y.to_vector().cwiseAbs().maxCoeff() > 1e6) {
        diverged = true;
        break;
      }
      xs.push_back(x.to_vector());
      us.push_back(u.forces());
      ys.push_back(y.to_vector());
      x = y;
    }
    if (diverged) {
      ++redraw_count;
      continue;
    }
    data.X.insert(data.X.end(), xs.begin(), xs.end());
    data.U.insert(data.U.end(), us.begin(), us.end());
    data.Y.insert(data.Y.end(), ys.begin(), ys.end());
    ++done;
  }
  if (redrawn) *redrawn = redraw_count;
  return data;
}

FitEvaluation evaluate_fit(const KoopmanModel& model, const SrbParams& params,
                           const TrainingConfig& training, int n_tests,
                           double horizon_s, std::uint64_t seed) {
  if (n_tests < 1) throw std::invalid_argument("evaluate_fit: n_tests >= 1");
  Rng rng(seed);
  const int steps = static_cast<int>(std::round(horizon_s / model.dt));
  const Vec2 arm_i{training.arm_x, -training.arm_z};
  const Vec2 arm_j{-training.arm_x, -training.arm_z};
  const bool flight = model.mode == ContactMode::Flight;

  FitEvaluation ev;
  ev.mean_abs_err.setZero(steps + 1, 6);
  ev.variance.setZero(steps + 1, 6);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(steps + 1, 6);
  Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(steps + 1, 6);

  if (steps == 0) return ev;  // zero horizon: errors identically zero

  for (int test = 0; test < n_tests; ++test) {
    const SrbState x0 = sample_initial_state(rng, training);
    std::vector<Vec4> u_seq(static_cast<std::size_t>(steps), Vec4::Zero());
    std::vector<ControlInput> plant_u(static_cast<std::size_t>(steps));
    for (int s = 0; s < steps; ++s) {
      ControlInput u;
      u.r_i = arm_i;
      u.r_j = arm_j;
      if (!flight) {
        u.F_i = sample_force(rng, arm_i, training);
        u.F_j = sample_force(rng, arm_j, training);
      }
      plant_u[static_cast<std::size_t>(s)] = u;
      u_seq[static_cast<std::size_t>(s)] = u.forces();
    }
    const auto truth = rollout(x0, plant_u, model.mode, params, model.dt);
    const auto pred = multi_step_predict(model, x0, u_seq);
    for (int s = 0; s <= steps; ++s) {
      const Vec6 err = (pred[static_cast<std::size_t>(s)].to_vector() -
                        truth[static_cast<std::size_t>(s)].to_vector())
                           .cwiseAbs();
      sum.row(s) += err.transpose();
      sum_sq.row(s) += err.array().square().matrix().transpose();
    }
  }
  ev.mean_abs_err = sum / n_tests;
  ev.variance =
      (sum_sq / n_tests - ev.mean_abs_err.array().square().matrix())
          .cwiseMax(0.0);
  ev.max_mean_abs_err = ev.mean_abs_err.maxCoeff();
  return ev;
}

Metrics compute_metrics(const RunLog& log) {
  if (log.records.empty())
    throw std::invalid_argument("compute_metrics: empty log");
  Metrics m;
  double ss = 0.0;
  std::vector<double> solve_ms;
  for (const auto& r : log.records) {
    const double err = r.state[3] - r.reference[3];
    ss += err * err;
    m.max_abs_pitch = std::max(m.max_abs_pitch, std::abs(r.state[2]));
    if (r.mode != ContactMode::Flight) solve_ms.push_back(r.qp_ms);
    if (r.event == "hold") ++m.hold_events;
    if (r.event == "switch") ++m.switch_events;
    if (r.event == "slip") ++m.slip_events;
  }
  m.vx_rmse = std::sqrt(ss / static_cast<double>(log.records.size()));
  if (!solve_ms.empty()) {
    std::sort(solve_ms.begin(), solve_ms.end());
    const auto pct = [&](double p) {
      const auto idx = static_cast<std::size_t>(
          p * static_cast<double>(solve_ms.size() - 1));
      return solve_ms[idx];
    };
    m.solve_ms_p50 = pct(0.5);
    m.solve_ms_p90 = pct(0.9);
    m.solve_ms_max = solve_ms.back();
  }
  m.fall = log.fell;
  m.fall_time = log.fall_time;
  return m;
}

namespace {

void write_double(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}

const char* kRunLogHeader =
    "t,px,pz,theta,vx,vz,omega,ref_px,ref_pz,ref_theta,ref_vx,ref_vz,"
    "ref_omega,gait,phase,mode,fr,fl,rr,rl,Fix,Fiz,Fjx,Fjz,tau_fr_hip,"
    "tau_fr_knee,tau_fl_hip,tau_fl_knee,tau_rr_hip,tau_rr_knee,tau_rl_hip,"
    "tau_rl_knee,qp_obj,qp_kkt,qp_ms,event";

}  // namespace

void save_runlog(const RunLog& log, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_runlog: cannot open " + path);
  os << kRunLogHeader << '\n';
  for (const auto& r : log.records) {
    write_double(os, r.t);
    for (int i = 0; i < 6; ++i) { os << ','; write_double(os, r.state[i]); }
    for (int i = 0; i < 6; ++i) { os << ','; write_double(os, r.reference[i]); }
    os << ',' << gait_name(r.gait) << ',' << r.phase << ','
       << mode_name(r.mode);
    for (int i = 0; i < 4; ++i)
      os << ',' << (r.contact[static_cast<std::size_t>(i)] ? 1 : 0);
    for (int i = 0; i < 4; ++i) { os << ','; write_double(os, r.forces[i]); }
    for (int i = 0; i < 8; ++i) {
      os << ',';
      write_double(os, r.tau[static_cast<std::size_t>(i)]);
    }
    os << ','; write_double(os, r.qp_objective);
    os << ','; write_double(os, r.qp_kkt);
    os << ','; write_double(os, r.qp_ms);
    os << ',' << r.event << '\n';
  }
}

RunLog load_runlog(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_runlog: cannot open " + path);
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("load_runlog: empty file " + path);
  RunLog log;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f;
    RunRecord r;
    const auto next = [&]() {
      if (!std::getline(ss, f, ','))
        throw std::runtime_error("load_runlog: truncated row in " + path);
      return f;
    };
    r.t = std::stod(next());
    for (int i = 0; i < 6; ++i) r.state[i] = std::stod(next());
    for (int i = 0; i < 6; ++i) r.reference[i] = std::stod(next());
    r.gait = gait_from_name(next());
    r.phase = std::stoi(next());
    r.mode = mode_from_name(next());
    for (int i = 0; i < 4; ++i)
      r.contact[static_cast<std::size_t>(i)] = std::stoi(next()) != 0;
    for (int i = 0; i < 4; ++i) r.forces[i] = std::stod(next());
    for (int i = 0; i < 8; ++i)
      r.tau[static_cast<std::size_t>(i)] = std::stod(next());
    r.qp_objective = std::stod(next());
    r.qp_kkt = std::stod(next());
    r.qp_ms = std::stod(next());
    std::getline(ss, r.event, ',');
    if (r.event == "fall") {
      log.fell = true;
      log.fall_time = r.t;
    }
    log.records.push_back(std::move(r));
  }
  return log;
}

void emit_outputs(const RunLog& log, const Metrics& metrics,
                  const SimConfig& config, const std::string& dir) {
  const auto path = [&](const char* name) { return dir + "/" + name; };
  save_runlog(log, path("runlog.csv"));

  nlohmann::json j;
  j["vx_rmse"] = metrics.vx_rmse;
  j["max_abs_pitch"] = metrics.max_abs_pitch;
  j["solve_ms_p50"] = metrics.solve_ms_p50;
  j["solve_ms_p90"] = metrics.solve_ms_p90;
  j["solve_ms_max"] = metrics.solve_ms_max;
  j["fall"] = metrics.fall;
  j["fall_time"] = metrics.fall_time;
  j["hold_events"] = metrics.hold_events;
  j["switch_events"] = metrics.switch_events;
  j["slip_events"] = metrics.slip_events;
  j["config"] = nlohmann::json::parse(
      config.config_json.empty() ? sim_config_to_json(config)
                                 : config.config_json);
  {
    std::ofstream os(path("metrics.json"));
    if (!os)
      throw std::runtime_error("emit_outputs: cannot open " +
                               path("metrics.json"));
    os << j.dump(1) << '\n';
  }
  {
    std::ofstream os(path("gait.csv"));
    if (!os)
      throw std::runtime_error("emit_outputs: cannot open " + path("gait.csv"));
    os << "t,gait,phase,mode,FR,FL,RR,RL\n";
    for (const auto& r : log.records) {
      write_double(os, r.t);
      os << ',' << gait_name(r.gait) << ',' << r.phase << ','
         << mode_name(r.mode);
      for (int i = 0; i < 4; ++i)
        os << ',' << (r.contact[static_cast<std::size_t>(i)] ? 1 : 0);
      os << '\n';
    }
  }
  {
    std::ofstream os(path("series_velocity.csv"));
    if (!os)
      throw std::runtime_error("emit_outputs: cannot open " +
                               path("series_velocity.csv"));
    os << "t,vx,vx_ref\n";
    for (const auto& r : log.records) {
      write_double(os, r.t);
      os << ',';
      write_double(os, r.state[3]);
      os << ',';
      write_double(os, r.reference[3]);
      os << '\n';
    }
  }
  {
    std::ofstream os(path("series_pitch.csv"));
    if (!os)
      throw std::runtime_error("emit_outputs: cannot open " +
                               path("series_pitch.csv"));
    os << "t,theta\n";
    for (const auto& r : log.records) {
      write_double(os, r.t);
      os << ',';
      write_double(os, r.state[2]);
      os << '\n';
    }
  }
}

}  // namespace kquad
