#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "softgrasp/pipeline.hpp"

namespace {

bool quiet_mode() {
  const char* level = std::getenv("SOFTGRASP_LOG");
  return level != nullptr && std::string(level) == "quiet";
}

softgrasp::SceneConfig scene_for(const std::string& path) {
  return path.empty() ? softgrasp::SceneConfig::defaults() : softgrasp::load_scene(path);
}

softgrasp::ParamsConfig params_for(const std::string& path) {
  return path.empty() ? softgrasp::ParamsConfig::defaults() : softgrasp::load_params(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"soft three-finger grasp simulator: calibration, grasping and evaluation"};
  app.require_subcommand(1);

  std::string scene_path, params_path, models_dir, results_path, object_id;
  std::string out_dir = "out";
  std::vector<std::string> object_filter;
  std::uint64_t seed = 42;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--scene", scene_path, "scene config JSON (built-in defaults when omitted)");
    cmd->add_option("--params", params_path,
                    "parameter config JSON (built-in defaults when omitted)");
    cmd->add_option("--seed", seed, "master seed (default 42)");
    cmd->add_option("--out", out_dir, "output directory (default ./out)");
  };

  CLI::App* calibrate =
      app.add_subcommand("calibrate", "synthesize press datasets and fit per-finger readout models");
  add_common(calibrate);

  CLI::App* grasp = app.add_subcommand("grasp", "run one interactive grasp episode on an object");
  add_common(grasp);
  grasp->add_option("object", object_id, "object id from the scene")->required();
  grasp->add_option("--models", models_dir, "directory holding model_finger<i>.json (default --out)");

  CLI::App* evaluate =
      app.add_subcommand("evaluate", "paired conventional-vs-interactive comparison with reports");
  add_common(evaluate);
  evaluate->add_option("--objects", object_filter, "restrict the comparison to these object ids");
  evaluate->add_option("--models", models_dir,
                       "directory holding model_finger<i>.json (default --out)");

  CLI::App* report = app.add_subcommand("report", "rebuild the CSV tables from a saved results.json");
  report->add_option("--results", results_path, "existing results.json")->required();
  report->add_option("--out", out_dir, "output directory (default ./out)");

  CLI11_PARSE(app, argc, argv);
  const bool quiet = quiet_mode();

  try {
    if (calibrate->parsed()) {
      const auto scene = scene_for(scene_path);
      const auto params = params_for(params_path);
      const auto outcome = softgrasp::run_calibrate(scene, params, seed, out_dir);
      if (!quiet) {
        const char* names[3] = {"finger_1", "finger_2", "finger_3"};
        std::cout << "metric";
        for (const char* n : names) std::cout << ',' << n;
        std::cout << '\n';
        auto line = [&](const char* metric, auto pick) {
          std::cout << metric;
          for (const auto& m : outcome.metrics) std::cout << ',' << pick(m);
          std::cout << '\n';
        };
        line("fn_rmse", [](const auto& m) { return m.fn_rmse; });
        line("fn_r2", [](const auto& m) { return m.fn_r2; });
        line("tz_rmse", [](const auto& m) { return m.tz_rmse; });
        line("tz_r2", [](const auto& m) { return m.tz_r2; });
        line("sign_success", [](const auto& m) { return m.sign_success; });
        std::cout << "wrote " << outcome.outputs.size() << " files to " << out_dir << "\n";
      }
    } else if (grasp->parsed()) {
      const auto scene = scene_for(scene_path);
      const auto params = params_for(params_path);
      const std::string models = models_dir.empty() ? out_dir : models_dir;
      const auto outcome = softgrasp::run_grasp(scene, params, seed, object_id, models, out_dir);
      if (!quiet) std::cout << outcome.summary << "wrote " << outcome.output.string() << "\n";
    } else if (evaluate->parsed()) {
      const auto scene = scene_for(scene_path);
      const auto params = params_for(params_path);
      const std::string models = models_dir.empty() ? out_dir : models_dir;
      const auto outcome =
          softgrasp::run_evaluate(scene, params, seed, object_filter, models, out_dir);
      if (!quiet) {
        std::cout << "object,conventional_successes,interactive_successes,n_trials\n";
        for (const auto& row : outcome.report.rows)
          std::cout << row.object_id << ',' << row.conventional_successes << ','
                    << row.interactive_successes << ',' << row.n_trials << '\n';
        for (const auto& path : outcome.outputs) std::cout << "wrote " << path.string() << "\n";
      }
    } else if (report->parsed()) {
      const auto outputs = softgrasp::run_report(results_path, out_dir);
      if (!quiet)
        for (const auto& path : outputs) std::cout << "wrote " << path.string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
