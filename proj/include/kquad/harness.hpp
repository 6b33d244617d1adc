#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "kquad/gait.hpp"
#include "kquad/koopman.hpp"
#include "kquad/leg.hpp"
#include "kquad/lmpc.hpp"
#include "kquad/terrain.hpp"

namespace kquad {

struct VelocityStep {
  double t{0.0};
  double vx{0.0};
};

/// Scripted slip disturbance: commanded forces are scaled by `scale` for
/// `duration` seconds starting at `t`.
struct SlipEvent {
  double t{0.0};
  double duration{0.05};
  double scale{0.3};
};

struct ScenarioConfig {
  std::string name{"trot-steps"};
  GaitType gait{GaitType::Trot};
  std::vector<VelocityStep> script{{0.0, 0.0}};
  double duration{5.0};
  bool rough_terrain{false};
  std::uint64_t terrain_seed{1};
  bool is_transition{false};
  GaitType transition_target{GaitType::Bound};
  double transition_time{3.0};
  std::vector<SlipEvent> slips;

  double vx_command(double t) const;
};

/// Named presets covering the velocity-step, rough-terrain, and
/// gait-transition scenarios.
ScenarioConfig make_scenario(const std::string& name);

struct ControllerConfig {
  double z_nom{0.30};
  double hip_x{0.19};       // hip half-spacing from CoM [m]
  double kv_trot{0.03};     // Raibert velocity gain, trot
  double kv_bound{0.10};    // Raibert velocity gain, bound
  double ema_alpha{0.014};  // per-tick low-pass on vx for bound placement
  double s_in{0.17};        // inward foot shift during bound [m]
  double vz_takeoff{0.49};  // bound vertical-velocity reference at stance
  double kz{2.0};           // apex-height feedback on the vz reference
  double swing_apex{0.08};
  Vec6 trot_Q{(Vec6() << 10.0, 50.0, 100.0, 10.0, 10.0, 1.0).finished()};
  Vec4 trot_R{Vec4::Constant(1e-6)};
  Vec6 bound_Q{(Vec6() << 20.0, 150.0, 50.0, 5.0, 50.0, 2.0).finished()};
  Vec4 bound_R{1e-5, 1e-6, 1e-5, 1e-6};
  Vec4 trot_u_min{-150.0, 0.0, -150.0, 0.0};
  Vec4 trot_u_max{150.0, 150.0, 150.0, 150.0};
  Vec4 bound_u_min{-150.0, 0.0, -150.0, 0.0};
  Vec4 bound_u_max{150.0, 250.0, 150.0, 250.0};
};

struct TrainingConfig {
  int n_rollouts{100};
  int rollout_len{100};
  double dt{0.001};
  double p_range{0.5};
  double theta_range{0.01};
  double v_range{1.0};
  double theta_dot_range{0.3};
  double fz_lo{20.0};
  double fz_hi{70.0};
  double fx_jitter{10.0};
  double arm_x{0.19};  // nominal foot arms for through-CoM force sampling
  double arm_z{0.30};
};

struct SimConfig {
  SrbParams srb;
  ObservableConfig observables;
  MpcConfig mpc;
  GaitSchedule schedule;
  LegParams leg;
  ControllerConfig ctrl;
  TrainingConfig training;
  ScenarioConfig scenario;
  std::uint64_t seed{0};
  double dt_plant{0.001};
  int control_every{5};  // control tick = this many plant steps
  bool dump_qp{false};
  std::string output_dir{"."};
  std::string config_json;  // verbatim dump, echoed into outputs
};

SimConfig default_sim_config();
/// Reads a JSON config; absent keys keep defaults. Throws on parse errors
/// with path context.
SimConfig load_sim_config(const std::string& path);
std::string sim_config_to_json(const SimConfig& config);

struct RunRecord {
  double t{0.0};
  Vec6 state;
  Vec6 reference;
  GaitType gait{GaitType::Trot};
  int phase{0};
  ContactMode mode{ContactMode::Trot};
  std::array<bool, 4> contact{};
  Vec4 forces;
  std::array<double, 8> tau{};  // FR, FL, RR, RL x (hip, knee)
  double qp_objective{0.0};
  double qp_kkt{0.0};
  double qp_ms{0.0};
  std::string event;  // "", "hold", "switch", "slip", "fall"
};

struct RunLog {
  std::vector<RunRecord> records;
  bool fell{false};
  double fall_time{-1.0};
};

struct Metrics {
  double vx_rmse{0.0};
  double max_abs_pitch{0.0};
  double solve_ms_p50{0.0};
  double solve_ms_p90{0.0};
  double solve_ms_max{0.0};
  bool fall{false};
  double fall_time{-1.0};
  int hold_events{0};
  int switch_events{0};
  int slip_events{0};
};

/// Through-CoM randomized force rollouts pooled into snapshot pairs.
/// Diverged rollouts are discarded and redrawn; the redraw count is
/// reported through `redrawn` when non-null. Flight snapshots record zero
/// forces (no contact, so inputs cannot influence the dynamics).
SnapshotSet generate_training_data(const SrbParams& params,
                                   const TrainingConfig& training,
                                   ContactMode mode, std::uint64_t seed,
                                   int* redrawn = nullptr);

struct FitEvaluation {
  Eigen::MatrixXd mean_abs_err;  // (horizon steps + 1) x 6
  Eigen::MatrixXd variance;      // same shape
  double max_mean_abs_err{0.0};
};

/// Held-out multi-step prediction error envelope against the plant.
FitEvaluation evaluate_fit(const KoopmanModel& model, const SrbParams& params,
                           const TrainingConfig& training, int n_tests,
                           double horizon_s, std::uint64_t seed);

using ModelSet = std::map<ContactMode, KoopmanModel>;

/// Full closed loop: plant at dt_plant, control every `control_every` plant
/// steps; FSM advance -> obstacle check -> LMPC in stance / zero force in
/// flight -> swing targets -> logged leg torques -> plant step. A fall
/// (|theta| > 0.8 rad or CoM below terrain + 0.05 m) terminates the run
/// with a flagged final record.
RunLog run_closed_loop(const SimConfig& config, const ModelSet& models);

/// 6 s scenario with a gait-switch request at transition_time.
RunLog run_transition_scenario(const SimConfig& config, const ModelSet& models);

Metrics compute_metrics(const RunLog& log);

void save_runlog(const RunLog& log, const std::string& path);
RunLog load_runlog(const std::string& path);

/// Writes runlog.csv, metrics.json, gait.csv, series_velocity.csv,
/// series_pitch.csv into `dir`; the config dump is embedded in metrics.json.
void emit_outputs(const RunLog& log, const Metrics& metrics,
                  const SimConfig& config, const std::string& dir);

}  // namespace kquad
