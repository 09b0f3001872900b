#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <json.hpp>
#include <stdexcept>
#include <string>

#include "helpers.hpp"
#include "softgrasp/pipeline.hpp"

using namespace softgrasp;

namespace {

// Small but representative workload for pipeline-level tests.
ParamsConfig quick_params() {
  ParamsConfig p = ParamsConfig::defaults();
  p.samples_per_finger = 400;
  p.trials_per_object = 3;
  return p;
}

std::filesystem::path config_dir() { return SOFTGRASP_CONFIG_DIR; }

bool contains(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("built-in defaults describe the full bench") {
  const SceneConfig scene = SceneConfig::defaults();
  CHECK_NOTHROW(scene.validate());
  REQUIRE(scene.objects.size() == 10);
  CHECK(scene.objects[0].id == "ball");
  CHECK(scene.objects[1].id == "cube");
  CHECK(scene.objects[3].id == "cylinder");
  CHECK(scene.objects[3].class_hint == "cylinder");
  CHECK(scene.objects[7].id == "potted_meat_can");
  CHECK(scene.objects[7].shape.pose.position.x() == doctest::Approx(0.010).epsilon(1e-12));

  const ParamsConfig params = ParamsConfig::defaults();
  CHECK_NOTHROW(params.validate());
  CHECK(params.trials_per_object == 20);
  CHECK(params.samples_per_finger == 2000);
  CHECK(params.disturbance.amplitudes.size() == 5);
}

TEST_CASE("scene configs survive a save-load round trip") {
  helpers::TempDir dir("cfg_scene");
  const SceneConfig scene = SceneConfig::defaults();
  const auto path = dir.path() / "scene.json";
  save_scene(path, scene);
  const SceneConfig loaded = load_scene(path);

  CHECK(loaded.gripper.base_radius == scene.gripper.base_radius);
  CHECK(loaded.gripper.friction_mu == scene.gripper.friction_mu);
  CHECK(loaded.finger_model.sensitivity_jitter == scene.finger_model.sensitivity_jitter);
  CHECK(loaded.default_axis == scene.default_axis);
  REQUIRE(loaded.objects.size() == scene.objects.size());
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    CHECK(loaded.objects[i].id == scene.objects[i].id);
    CHECK(loaded.objects[i].class_hint == scene.objects[i].class_hint);
    CHECK(loaded.objects[i].shape.kind == scene.objects[i].shape.kind);
    CHECK(loaded.objects[i].shape.pose.orientation == scene.objects[i].shape.pose.orientation);
  }

  // a second save of the loaded config reproduces the bytes exactly
  const auto again = dir.path() / "scene2.json";
  save_scene(again, loaded);
  CHECK(helpers::slurp(again) == helpers::slurp(path));
}

TEST_CASE("parameter configs survive a save-load round trip") {
  helpers::TempDir dir("cfg_params");
  const ParamsConfig params = ParamsConfig::defaults();
  const auto path = dir.path() / "params.json";
  save_params(path, params);
  const ParamsConfig loaded = load_params(path);
  CHECK(loaded.optimizer.grip_total == params.optimizer.grip_total);
  CHECK(loaded.optimizer.initial_step == params.optimizer.initial_step);
  CHECK(loaded.fit.ridge_lambda == params.fit.ridge_lambda);
  CHECK(loaded.fit.tau_z == params.fit.tau_z);
  CHECK(loaded.samples_per_finger == params.samples_per_finger);
  CHECK(loaded.disturbance.amplitudes == params.disturbance.amplitudes);

  const auto again = dir.path() / "params2.json";
  save_params(again, loaded);
  CHECK(helpers::slurp(again) == helpers::slurp(path));
}

TEST_CASE("the checked-in configs are the built-in defaults") {
  helpers::TempDir dir("cfg_checked");
  const auto mine = dir.path() / "scene.json";
  save_scene(mine, SceneConfig::defaults());
  const auto theirs = dir.path() / "scene_repo.json";
  save_scene(theirs, load_scene(config_dir() / "default_scene.json"));
  CHECK(helpers::slurp(mine) == helpers::slurp(theirs));

  const auto mine_p = dir.path() / "params.json";
  save_params(mine_p, ParamsConfig::defaults());
  const auto theirs_p = dir.path() / "params_repo.json";
  save_params(theirs_p, load_params(config_dir() / "default_params.json"));
  CHECK(helpers::slurp(mine_p) == helpers::slurp(theirs_p));
}

TEST_CASE("config loading reports missing and broken files") {
  helpers::TempDir dir("cfg_bad");
  CHECK_THROWS_AS(load_scene(dir.path() / "nope.json"), std::exception);
  std::ofstream(dir.path() / "broken.json") << "{not json";
  CHECK_THROWS_AS(load_scene(dir.path() / "broken.json"), std::exception);
  CHECK_THROWS_AS(load_params(dir.path() / "broken.json"), std::exception);
}

TEST_CASE("calibrate writes datasets, models and a metrics table") {
  helpers::TempDir dir("cal_out");
  const CalibrateOutcome outcome =
      run_calibrate(SceneConfig::defaults(), quick_params(), 42, dir.path());
  REQUIRE(outcome.outputs.size() == 7);
  for (const auto& path : outcome.outputs) CHECK(std::filesystem::exists(path));
  for (int finger = 0; finger < 3; ++finger) {
    CHECK(outcome.metrics[finger].fn_r2 > 0.9);
    CHECK(outcome.metrics[finger].sign_success > 0.9);
    const std::string csv =
        helpers::slurp(dir.path() / ("dataset_finger" + std::to_string(finger) + ".csv"));
    CHECK(contains(csv, "a1,a2,a3,a4,a5,Fx,Fy,Fz,Tx,Ty,Tz"));
  }
  const std::string metrics = helpers::slurp(dir.path() / "metrics.csv");
  CHECK(contains(metrics, "metric,finger_1,finger_2,finger_3"));
  CHECK(contains(metrics, "sign_success"));

  // the saved models are what load_perception hands back
  const Perception perception = load_perception(SceneConfig::defaults(), dir.path());
  CHECK(perception.readout[0].metrics.fn_r2 == doctest::Approx(outcome.metrics[0].fn_r2));
}

TEST_CASE("loading models before calibrating explains the fix") {
  helpers::TempDir dir("cal_missing");
  try {
    load_perception(SceneConfig::defaults(), dir.path());
    FAIL("expected a missing-model error");
  } catch (const std::runtime_error& e) {
    CHECK(contains(e.what(), "calibrate"));
  }
}

TEST_CASE("a grasp episode writes its record and narrates the transition") {
  helpers::TempDir models("grasp_models");
  run_calibrate(SceneConfig::defaults(), quick_params(), 42, models.path());
  helpers::TempDir out("grasp_out");

  const GraspOutcome outcome = run_grasp(SceneConfig::defaults(), quick_params(), 42, "ball",
                                         models.path(), out.path());
  CHECK(std::filesystem::exists(out.path() / "grasp_ball.json"));
  const auto doc = nlohmann::json::parse(helpers::slurp(out.path() / "grasp_ball.json"));
  CHECK(doc["object_id"] == "ball");
  CHECK(doc["policy"] == "interactive");
  CHECK(doc["grasp_failed"] == false);
  CHECK(doc["margin_after"].get<double>() > 0.0);
  CHECK(doc["final_config"]["fingers"].size() == 3);

  CHECK(contains(outcome.summary, "object: ball"));
  CHECK(contains(outcome.summary, "Circular"));
  CHECK(contains(outcome.summary, "margin:"));

  CHECK_THROWS_AS(run_grasp(SceneConfig::defaults(), quick_params(), 42, "teapot", models.path(),
                            out.path()),
                  std::invalid_argument);
}

TEST_CASE("evaluate honors the object filter and reports one row per object") {
  helpers::TempDir models("eval_models");
  run_calibrate(SceneConfig::defaults(), quick_params(), 42, models.path());
  helpers::TempDir out("eval_out");

  const EvaluateOutcome outcome = run_evaluate(SceneConfig::defaults(), quick_params(), 42,
                                               {"ball"}, models.path(), out.path());
  REQUIRE(outcome.report.rows.size() == 1);
  CHECK(outcome.report.rows[0].object_id == "ball");
  CHECK(outcome.report.rows[0].n_trials == 3);
  // a ball holds comfortably under either policy
  CHECK(outcome.report.rows[0].conventional_successes == 3);
  CHECK(outcome.report.rows[0].interactive_successes == 3);
  CHECK(helpers::slurp(out.path() / "table.csv") ==
        "object,conventional_successes,interactive_successes,n_trials\n"
        "ball,3,3,3\n");

  CHECK_THROWS_AS(run_evaluate(SceneConfig::defaults(), quick_params(), 42, {"teapot"},
                               models.path(), out.path()),
                  std::invalid_argument);
}

TEST_CASE("evaluate is byte-stable under a fixed seed") {
  helpers::TempDir models("stable_models");
  run_calibrate(SceneConfig::defaults(), quick_params(), 42, models.path());
  helpers::TempDir a("stable_a");
  helpers::TempDir b("stable_b");
  run_evaluate(SceneConfig::defaults(), quick_params(), 42, {"ball", "cube"}, models.path(),
               a.path());
  run_evaluate(SceneConfig::defaults(), quick_params(), 42, {"ball", "cube"}, models.path(),
               b.path());
  CHECK(helpers::slurp(a.path() / "results.json") == helpers::slurp(b.path() / "results.json"));
  CHECK(helpers::slurp(a.path() / "table.csv") == helpers::slurp(b.path() / "table.csv"));
  CHECK(helpers::slurp(a.path() / "plotdata.csv") == helpers::slurp(b.path() / "plotdata.csv"));
}

TEST_CASE("report rebuilds the tables from a saved results file") {
  helpers::TempDir models("rep_models");
  run_calibrate(SceneConfig::defaults(), quick_params(), 42, models.path());
  helpers::TempDir eval_dir("rep_eval");
  run_evaluate(SceneConfig::defaults(), quick_params(), 42, {"ball"}, models.path(),
               eval_dir.path());

  helpers::TempDir rebuilt("rep_out");
  const auto outputs = run_report(eval_dir.path() / "results.json", rebuilt.path());
  REQUIRE(outputs.size() == 2);
  CHECK(helpers::slurp(rebuilt.path() / "table.csv") ==
        helpers::slurp(eval_dir.path() / "table.csv"));
  CHECK(helpers::slurp(rebuilt.path() / "plotdata.csv") ==
        helpers::slurp(eval_dir.path() / "plotdata.csv"));

  CHECK_THROWS_AS(run_report(eval_dir.path() / "absent.json", rebuilt.path()),
                  std::runtime_error);
}

TEST_CASE("the command-line binary drives the whole pipeline") {
  const char* cli = SOFTGRASP_CLI_PATH;
  REQUIRE(std::filesystem::exists(cli));
  helpers::TempDir dir("cli_e2e");
  const std::string out = (dir.path() / "out").string();
  const std::string params_path = (dir.path() / "params.json").string();
  save_params(params_path, quick_params());

  const std::string base = std::string("\"") + cli + "\"";
  auto run = [&](const std::string& args) {
    return std::system((base + ' ' + args + " >/dev/null 2>&1").c_str());
  };

  CHECK(run("calibrate --params \"" + params_path + "\" --seed 42 --out \"" + out + "\"") == 0);
  CHECK(std::filesystem::exists(out + "/model_finger2.json"));

  CHECK(run("grasp ball --params \"" + params_path + "\" --seed 42 --out \"" + out + "\"") == 0);
  CHECK(std::filesystem::exists(out + "/grasp_ball.json"));

  CHECK(run("evaluate --params \"" + params_path + "\" --seed 42 --objects ball --out \"" + out +
            "\"") == 0);
  CHECK(std::filesystem::exists(out + "/results.json"));
  CHECK(std::filesystem::exists(out + "/table.csv"));

  const std::string report_out = (dir.path() / "report").string();
  CHECK(run("report --results \"" + out + "/results.json\" --out \"" + report_out + "\"") == 0);
  CHECK(helpers::slurp(report_out + "/table.csv") == helpers::slurp(out + "/table.csv"));

  // failures exit nonzero and leave no partial outputs behind
  CHECK(run("grasp teapot --params \"" + params_path + "\" --out \"" + out + "\"") != 0);
  CHECK_FALSE(std::filesystem::exists(out + "/grasp_teapot.json"));
  const std::string fresh = (dir.path() / "fresh").string();
  CHECK(run("evaluate --models \"" + dir.path().string() + "/nomodels\" --out \"" + fresh +
            "\"") != 0);
  CHECK_FALSE(std::filesystem::exists(fresh + "/results.json"));
  CHECK(run("report --results \"" + out + "/absent.json\" --out \"" + report_out + "\"") != 0);
}
