#include "softgrasp/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace softgrasp {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string fmt_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string deg_str(double rad) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.1f", rad2deg(rad));
  return buf;
}

std::string mode_label(BaseMode mode) {
  switch (mode) {
    case BaseMode::Circular: return "Circular";
    case BaseMode::Lateral: return "Lateral";
    case BaseMode::Parallel: return "Parallel";
  }
  throw std::logic_error("unknown base mode");
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

ordered_json config_to_json(const GripperConfiguration& config) {
  ordered_json j;
  j["mode"] = mode_label(config.mode);
  j["mode_axis"] = config.mode_axis;
  j["fingers"] = ordered_json::array();
  for (const FingerPose& f : config.fingers) {
    j["fingers"].push_back({{"proximal", f.proximal},
                            {"distal", f.distal},
                            {"grip_command", f.grip_command},
                            {"active", f.active}});
  }
  return j;
}

ordered_json state_to_json(const GraspState& state) {
  ordered_json j;
  j["equilibrated"] = state.equilibrated;
  j["residual_force"] = {state.residual_force.x(), state.residual_force.y()};
  j["residual_torque"] = state.residual_torque;
  j["contacts"] = ordered_json::array();
  for (const ContactForce& c : state.contacts) {
    j["contacts"].push_back({{"finger", c.finger},
                             {"point", {c.point.x(), c.point.y()}},
                             {"normal", {c.normal.x(), c.normal.y()}},
                             {"normal_force", c.normal_force},
                             {"tangential", c.tangential},
                             {"z_torque", c.z_torque}});
  }
  return j;
}

const SceneObjectRef& find_object(const SceneConfig& scene, const std::string& object_id) {
  for (const SceneObjectRef& object : scene.objects)
    if (object.id == object_id) return object;
  std::string known;
  for (const SceneObjectRef& object : scene.objects) {
    if (!known.empty()) known += ", ";
    known += object.id;
  }
  throw std::invalid_argument("unknown object id '" + object_id + "' (scene has: " + known + ")");
}

}  // namespace

CalibrateOutcome run_calibrate(const SceneConfig& scene, const ParamsConfig& params,
                               std::uint64_t seed, const fs::path& out_dir) {
  scene.validate();
  params.validate();
  fs::create_directories(out_dir);

  std::vector<ObjectShape> shapes;
  for (const SceneObjectRef& object : scene.objects) shapes.push_back(object.shape);

  CalibrateOutcome outcome;
  for (int finger = 0; finger < 3; ++finger) {
    const FingerResponseModel model = make_finger_model(scene.finger_model, finger);
    Rng rng = SeedMix(seed).mix("dataset").mix(finger).rng();
    const std::vector<SensorSample> samples =
        generate_dataset(shapes, params.samples_per_finger, model, scene.press, rng);

    const fs::path dataset_path = out_dir / ("dataset_finger" + std::to_string(finger) + ".csv");
    save_dataset_csv(dataset_path, samples);
    outcome.outputs.push_back(dataset_path);

    FitOptions options = params.fit;
    options.split_seed = SeedMix(seed).mix("split").mix(finger).value();
    const CalibrationModel fitted = fit(samples, options);
    outcome.metrics[finger] = fitted.metrics;

    const fs::path model_path = out_dir / ("model_finger" + std::to_string(finger) + ".json");
    save_model_json(model_path, fitted);
    outcome.outputs.push_back(model_path);
  }

  std::string csv = "metric,finger_1,finger_2,finger_3\n";
  auto row = [&csv, &outcome](const char* name, auto pick) {
    csv += name;
    for (int finger = 0; finger < 3; ++finger) csv += ',' + fmt_g9(pick(outcome.metrics[finger]));
    csv += '\n';
  };
  row("fn_rmse", [](const CalibrationMetrics& m) { return m.fn_rmse; });
  row("fn_r2", [](const CalibrationMetrics& m) { return m.fn_r2; });
  row("tz_rmse", [](const CalibrationMetrics& m) { return m.tz_rmse; });
  row("tz_r2", [](const CalibrationMetrics& m) { return m.tz_r2; });
  row("sign_success", [](const CalibrationMetrics& m) { return m.sign_success; });
  const fs::path metrics_path = out_dir / "metrics.csv";
  write_file_atomic(metrics_path, csv);
  outcome.outputs.push_back(metrics_path);
  return outcome;
}

Perception load_perception(const SceneConfig& scene, const fs::path& model_dir) {
  Perception perception;
  for (int finger = 0; finger < 3; ++finger) {
    perception.response[finger] = make_finger_model(scene.finger_model, finger);
    const fs::path model_path = model_dir / ("model_finger" + std::to_string(finger) + ".json");
    if (!fs::exists(model_path))
      throw std::runtime_error("missing calibration model " + model_path.string() +
                               "; run the calibrate step first");
    perception.readout[finger] = load_model_json(model_path);
  }
  return perception;
}

GraspOutcome run_grasp(const SceneConfig& scene, const ParamsConfig& params, std::uint64_t seed,
                       const std::string& object_id, const fs::path& model_dir,
                       const fs::path& out_dir) {
  scene.validate();
  params.validate();
  const SceneObjectRef& object = find_object(scene, object_id);
  const Perception perception = load_perception(scene, model_dir);
  fs::create_directories(out_dir);

  Rng rng = SeedMix(seed).mix("episode").mix(object_id).rng();
  const GripperConfiguration start =
      GripperConfiguration::circular(scene.default_axis, params.optimizer.grip_total / 3.0);
  GraspOutcome outcome;
  outcome.grasp = interactive_grasp(object.shape, scene.gripper, params.optimizer, perception, rng,
                                    object.class_hint, start);
  outcome.grasp.seed = seed;
  const OptimizedGrasp& g = outcome.grasp;

  ordered_json j;
  j["object_id"] = object_id;
  j["policy"] = g.policy;
  j["seed"] = g.seed;
  j["shape_class_used"] = g.shape_class_used;
  j["tactile_summary"] = {{"shape_class", to_string(g.summary.shape_class)},
                          {"pair_axis", g.summary.pair_axis},
                          {"pair_width", g.summary.pair_width},
                          {"cross_extent", g.summary.cross_extent}};
  j["initial_readings"] = ordered_json::array();
  for (const FingerReading& r : g.initial_readings) {
    j["initial_readings"].push_back({{"in_contact", r.in_contact},
                                     {"predicted_force", r.predicted_force},
                                     {"predicted_sign", r.predicted_sign}});
  }
  j["initial_config"] = config_to_json(g.initial_config);
  j["final_config"] = config_to_json(g.final_config);
  j["initial_state"] = state_to_json(g.initial_state);
  j["final_state"] = state_to_json(g.final_state);
  j["margin_before"] = g.margin_before;
  j["margin_after"] = g.margin_after;
  j["torque_iterations"] = g.torque_iterations;
  j["friction_iterations"] = g.friction_iterations;
  j["torque_converged"] = g.torque_converged;
  j["friction_balanced"] = g.friction_balanced;
  j["grasp_failed"] = g.grasp_failed;

  outcome.output = out_dir / ("grasp_" + object_id + ".json");
  write_file_atomic(outcome.output, j.dump(2) + "\n");

  std::ostringstream text;
  text << "object: " << object_id << "\n";
  text << "shape class: " << g.shape_class_used
       << (object.class_hint.empty() ? " (from touch)" : " (hinted)") << "\n";
  text << "configuration: " << mode_label(g.initial_config.mode) << "(axis "
       << deg_str(g.initial_config.mode_axis) << " deg) -> " << mode_label(g.final_config.mode)
       << "(axis " << deg_str(g.final_config.mode_axis) << " deg)\n";
  text << "torque alignment: " << (g.torque_converged ? "converged" : "stopped") << " after "
       << g.torque_iterations << " iteration(s)\n";
  text << "force balance: " << (g.friction_balanced ? "balanced" : "residual above tolerance")
       << "\n";
  for (int finger = 0; finger < 3; ++finger) {
    const FingerPose& f = g.final_config.fingers[finger];
    text << "finger " << finger << ": "
         << (f.active ? "grip " + fmt_g9(f.grip_command) + " N, base " + deg_str(f.proximal) + " deg"
                      : std::string("released"))
         << "\n";
  }
  text << "margin: " << fmt_g9(g.margin_before) << " -> " << fmt_g9(g.margin_after) << " N\n";
  if (g.grasp_failed) text << "grasp failed: fewer than two contacts\n";
  outcome.summary = text.str();
  return outcome;
}

EvaluateOutcome run_evaluate(const SceneConfig& scene, const ParamsConfig& params,
                             std::uint64_t seed, const std::vector<std::string>& object_filter,
                             const fs::path& model_dir, const fs::path& out_dir) {
  scene.validate();
  params.validate();
  const Perception perception = load_perception(scene, model_dir);

  std::vector<SceneObjectRef> objects;
  if (object_filter.empty()) {
    objects = scene.objects;
  } else {
    for (const std::string& id : object_filter) objects.push_back(find_object(scene, id));
  }

  EvaluateOutcome outcome;
  outcome.report =
      run_comparison(objects, params.trials_per_object, scene.gripper, scene.pose_noise,
                     params.optimizer, perception, params.disturbance, seed, scene.default_axis);
  emit_report(outcome.report, out_dir);
  outcome.outputs = {out_dir / "results.json", out_dir / "table.csv", out_dir / "plotdata.csv"};
  return outcome;
}

std::vector<fs::path> run_report(const fs::path& results_json, const fs::path& out_dir) {
  std::ifstream in(results_json);
  if (!in) throw std::runtime_error("cannot open results file: " + results_json.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("invalid JSON in " + results_json.string() + ": " + e.what());
  }

  ComparisonReport report;
  report.master_seed = j.value("master_seed", std::uint64_t{0});
  report.n_trials = j.value("n_trials", 0);
  for (const json& r : j.value("rows", json::array())) {
    ComparisonRow row;
    row.object_id = r.value("object_id", std::string{});
    row.conventional_successes = r.value("conventional_successes", 0);
    row.interactive_successes = r.value("interactive_successes", 0);
    row.n_trials = r.value("n_trials", 0);
    report.rows.push_back(std::move(row));
  }
  for (const json& t : j.value("trials", json::array())) {
    TrialResult trial;
    trial.object_id = t.value("object_id", std::string{});
    trial.policy = t.value("policy", std::string{});
    trial.success = t.value("success", false);
    trial.failure_amplitude = t.value("failure_amplitude", 0.0);
    trial.margin = t.value("margin", 0.0);
    trial.seed = t.value("seed", std::uint64_t{0});
    report.trials.push_back(std::move(trial));
  }

  emit_report(report, out_dir);
  return {out_dir / "table.csv", out_dir / "plotdata.csv"};
}

}  // namespace softgrasp
