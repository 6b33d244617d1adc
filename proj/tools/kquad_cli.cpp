#include "CLI11.hpp"
#include "kquad/harness.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>

namespace {

// Exit codes: 0 ok, 1 usage/parse (CLI11), 2 unreadable config,
// 3 missing/bad model or data file, 4 runtime failure.
constexpr int kExitConfig = 2;
constexpr int kExitModel = 3;
constexpr int kExitRuntime = 4;

kquad::SimConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return kquad::default_sim_config();
  return kquad::load_sim_config(path);
}

kquad::ModelSet load_models(const std::string& dir,
                            const std::vector<kquad::ContactMode>& modes) {
  kquad::ModelSet models;
  for (const auto mode : modes) {
    const std::string path =
        dir + "/" + kquad::mode_name(mode) + ".json";
    if (!std::filesystem::exists(path))
      throw kquad::ModelFormatError("model file not found: " + path);
    models[mode] = kquad::load_model(path);
  }
  return models;
}

std::vector<kquad::ContactMode> modes_for_scenario(
    const kquad::ScenarioConfig& s) {
  if (s.is_transition)
    return {kquad::ContactMode::Trot, kquad::ContactMode::FrontStance,
            kquad::ContactMode::RearStance};
  if (s.gait == kquad::GaitType::Trot) return {kquad::ContactMode::Trot};
  return {kquad::ContactMode::FrontStance, kquad::ContactMode::RearStance};
}

int run_simulation(kquad::SimConfig config, const std::string& model_dir,
                   bool transition) {
  const auto models = load_models(model_dir, modes_for_scenario(config.scenario));
  std::filesystem::create_directories(config.output_dir);
  const kquad::RunLog log = transition
                                ? kquad::run_transition_scenario(config, models)
                                : kquad::run_closed_loop(config, models);
  const kquad::Metrics metrics = kquad::compute_metrics(log);
  kquad::emit_outputs(log, metrics, config, config.output_dir);
  std::printf("scenario=%s vx_rmse=%.6f max_abs_pitch=%.6f fall=%d\n",
              config.scenario.name.c_str(), metrics.vx_rmse,
              metrics.max_abs_pitch, metrics.fall ? 1 : 0);
  return metrics.fall ? kExitRuntime : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Koopman-based quadruped gait control toolkit"};
  app.require_subcommand(1);

  std::string config_path, mode_str = "trot", out_path, data_path,
              model_path, model_dir = ".", scenario_name, log_path,
              target_str = "bound";
  std::uint64_t seed = 0;
  double ridge = 1e-8, horizon = 0.05, at_time = 3.0;
  int n_tests = 50;
  bool dump_qp = false;
  bool have_seed = false;

  auto* gen = app.add_subcommand("gen-data", "Generate training snapshots");
  gen->add_option("--config", config_path, "JSON config file");
  gen->add_option("--mode", mode_str, "Contact mode (trot|front|rear|flight)");
  gen->add_option("--seed", seed, "RNG seed")->required();
  gen->add_option("--out", out_path, "Output snapshot CSV")->required();

  auto* fit = app.add_subcommand("fit", "Fit a lifted linear model via EDMD");
  fit->add_option("--config", config_path, "JSON config file");
  fit->add_option("--data", data_path, "Snapshot CSV from gen-data")->required();
  fit->add_option("--ridge", ridge, "Tikhonov regularization");
  fit->add_option("--out", out_path, "Output model JSON")->required();

  auto* ev = app.add_subcommand("eval-fit", "Held-out prediction error");
  ev->add_option("--config", config_path, "JSON config file");
  ev->add_option("--model", model_path, "Model JSON")->required();
  ev->add_option("--seed", seed, "RNG seed")->required();
  ev->add_option("--tests", n_tests, "Number of held-out tests");
  ev->add_option("--horizon", horizon, "Prediction horizon [s]");

  auto* sim = app.add_subcommand("simulate", "Closed-loop scenario");
  sim->add_option("--config", config_path, "JSON config file");
  sim->add_option("--scenario", scenario_name,
                  "Preset scenario name (overrides config scenario)");
  sim->add_option("--models", model_dir, "Directory with <mode>.json models");
  sim->add_option("--out", out_path, "Output directory");
  sim->add_option("--seed", seed, "Terrain seed override")
      ->each([&](const std::string&) { have_seed = true; });
  sim->add_flag("--dump-qp", dump_qp, "Dump one QP instance as JSON");

  auto* tr = app.add_subcommand("transition", "6 s gait-switch scenario");
  tr->add_option("--config", config_path, "JSON config file");
  tr->add_option("--from", mode_str, "Starting gait (trot|bound)");
  tr->add_option("--to", target_str, "Target gait (trot|bound)");
  tr->add_option("--at", at_time, "Switch request time [s]");
  tr->add_option("--models", model_dir, "Directory with <mode>.json models");
  tr->add_option("--out", out_path, "Output directory");

  auto* met = app.add_subcommand("metrics", "Recompute metrics from a run log");
  met->add_option("--log", log_path, "runlog.csv path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    kquad::SimConfig config;
    try {
      config = load_config_or_default(config_path);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: config: %s\n", e.what());
      return kExitConfig;
    }

    if (gen->parsed()) {
      const auto mode = kquad::mode_from_name(mode_str);
      int redrawn = 0;
      const auto data = kquad::generate_training_data(config.srb,
                                                      config.training, mode,
                                                      seed, &redrawn);
      kquad::save_snapshots(data, out_path);
      std::printf("mode=%s samples=%zu redrawn=%d out=%s\n",
                  kquad::mode_name(mode), data.size(), redrawn,
                  out_path.c_str());
      return 0;
    }
    if (fit->parsed()) {
      if (!std::filesystem::exists(data_path)) {
        std::fprintf(stderr, "error: data file not found: %s\n",
                     data_path.c_str());
        return kExitModel;
      }
      const auto data = kquad::load_snapshots(data_path);
      const auto model = kquad::edmd_fit(data, config.observables, ridge);
      kquad::save_model(model, out_path);
      std::printf("mode=%s residual=%.6e condition=%.3e samples=%d out=%s\n",
                  kquad::mode_name(model.mode), model.fit_stats.residual,
                  model.fit_stats.condition_number,
                  model.fit_stats.sample_count, out_path.c_str());
      return 0;
    }
    if (ev->parsed()) {
      if (!std::filesystem::exists(model_path)) {
        std::fprintf(stderr, "error: model file not found: %s\n",
                     model_path.c_str());
        return kExitModel;
      }
      const auto model = kquad::load_model(model_path);
      const auto result = kquad::evaluate_fit(model, config.srb,
                                              config.training, n_tests,
                                              horizon, seed);
      std::printf("mode=%s tests=%d horizon=%.3f max_mean_abs_err=%.6e\n",
                  kquad::mode_name(model.mode), n_tests, horizon,
                  result.max_mean_abs_err);
      return 0;
    }
    if (sim->parsed()) {
      if (!scenario_name.empty())
        config.scenario = kquad::make_scenario(scenario_name);
      if (have_seed) config.scenario.terrain_seed = seed;
      if (!out_path.empty()) config.output_dir = out_path;
      config.dump_qp = dump_qp;
      config.config_json = kquad::sim_config_to_json(config);
      return run_simulation(config, model_dir, false);
    }
    if (tr->parsed()) {
      config.scenario = kquad::make_scenario(
          kquad::gait_from_name(target_str) == kquad::GaitType::Bound
              ? "trot-to-bound"
              : "bound-to-trot");
      config.scenario.transition_time = at_time;
      if (!out_path.empty()) config.output_dir = out_path;
      config.config_json = kquad::sim_config_to_json(config);
      return run_simulation(config, model_dir, true);
    }
    if (met->parsed()) {
      if (!std::filesystem::exists(log_path)) {
        std::fprintf(stderr, "error: log file not found: %s\n",
                     log_path.c_str());
        return kExitModel;
      }
      const auto log = kquad::load_runlog(log_path);
      const auto m = kquad::compute_metrics(log);
      std::printf(
          "vx_rmse=%.6f max_abs_pitch=%.6f solve_ms_p50=%.4f fall=%d\n",
          m.vx_rmse, m.max_abs_pitch, m.solve_ms_p50, m.fall ? 1 : 0);
      return 0;
    }
  } catch (const kquad::ModelFormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitModel;
  } catch (const kquad::ModelVersionError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitModel;
  } catch (const kquad::ModelDimensionError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitModel;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
