#include "softgrasp/config.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace softgrasp {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string mode_name(BaseMode mode) {
  switch (mode) {
    case BaseMode::Circular: return "circular";
    case BaseMode::Lateral: return "lateral";
    case BaseMode::Parallel: return "parallel";
  }
  throw std::logic_error("unknown base mode");
}

BaseMode mode_from_name(const std::string& name) {
  if (name == "circular") return BaseMode::Circular;
  if (name == "lateral") return BaseMode::Lateral;
  if (name == "parallel") return BaseMode::Parallel;
  throw std::invalid_argument("unknown base mode: " + name);
}

std::string kind_name(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Circle: return "circle";
    case ShapeKind::Square: return "square";
    case ShapeKind::Rectangle: return "rectangle";
    case ShapeKind::Triangle: return "triangle";
  }
  throw std::logic_error("unknown shape kind");
}

ordered_json shape_to_json(const ObjectShape& shape) {
  ordered_json j;
  j["kind"] = kind_name(shape.kind);
  switch (shape.kind) {
    case ShapeKind::Circle: j["radius"] = shape.radius; break;
    case ShapeKind::Square:
    case ShapeKind::Triangle: j["side"] = shape.width; break;
    case ShapeKind::Rectangle:
      j["width"] = shape.width;
      j["height"] = shape.height;
      break;
  }
  j["pose"] = {{"position", {shape.pose.position.x(), shape.pose.position.y()}},
               {"orientation", shape.pose.orientation}};
  return j;
}

ObjectShape shape_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  Pose pose;
  if (j.contains("pose")) {
    const json& p = j.at("pose");
    if (p.contains("position")) {
      pose.position.x() = p.at("position").at(0).get<double>();
      pose.position.y() = p.at("position").at(1).get<double>();
    }
    pose.orientation = p.value("orientation", 0.0);
  }
  if (kind == "circle") return ObjectShape::circle(j.at("radius").get<double>(), pose);
  if (kind == "square") return ObjectShape::square(j.at("side").get<double>(), pose);
  if (kind == "rectangle")
    return ObjectShape::rectangle(j.at("width").get<double>(), j.at("height").get<double>(), pose);
  if (kind == "triangle") return ObjectShape::triangle(j.at("side").get<double>(), pose);
  throw std::invalid_argument("unknown shape kind: " + kind);
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("invalid JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

void write_json_file(const std::filesystem::path& path, const ordered_json& doc) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out << doc.dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace

SceneConfig SceneConfig::defaults() {
  SceneConfig scene;
  // labeled primitives standing in for the usual benchmark items; class hints
  // mark the items whose silhouette hides a known side-grasp preference
  auto add = [&scene](std::string id, ObjectShape shape, std::string hint = "") {
    scene.objects.push_back({std::move(id), shape, std::move(hint)});
  };
  add("ball", ObjectShape::circle(0.030));
  add("cube", ObjectShape::square(0.040));
  add("cuboid", ObjectShape::rectangle(0.080, 0.040));
  add("cylinder", ObjectShape::circle(0.030), "cylinder");
  add("triangular_prism", ObjectShape::triangle(0.050));
  add("coffee_can", ObjectShape::circle(0.034), "cylinder");
  add("mustard_bottle", ObjectShape::rectangle(0.050, 0.080));
  add("potted_meat_can", ObjectShape::rectangle(0.075, 0.050, Pose{{0.010, 0.0}, 0.0}));
  add("tennis_ball", ObjectShape::circle(0.033));
  add("chips_can", ObjectShape::circle(0.037), "cylinder");
  return scene;
}

void SceneConfig::validate() const {
  gripper.validate();
  finger_model.validate();
  press.validate();
  pose_noise.validate();
  if (!std::isfinite(default_axis)) throw std::invalid_argument("default axis must be finite");
  for (const SceneObjectRef& object : objects) {
    if (object.id.empty()) throw std::invalid_argument("scene object with empty id");
    object.shape.validate();
  }
}

ParamsConfig ParamsConfig::defaults() {
  ParamsConfig params;
  params.optimizer.preferences = OptimizationParams::default_preferences();
  return params;
}

void ParamsConfig::validate() const {
  optimizer.validate();
  fit.validate();
  disturbance.validate();
  if (samples_per_finger < 10) throw std::invalid_argument("samples_per_finger must be >= 10");
  if (trials_per_object < 1) throw std::invalid_argument("trials_per_object must be >= 1");
}

SceneConfig load_scene(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  SceneConfig scene = SceneConfig::defaults();
  if (j.contains("gripper")) {
    const json& g = j.at("gripper");
    GripperGeometry& d = scene.gripper;
    d.base_radius = g.value("base_radius", d.base_radius);
    d.parallel_offset = g.value("parallel_offset", d.parallel_offset);
    d.max_compression = g.value("max_compression", d.max_compression);
    d.contact_stiffness = g.value("contact_stiffness", d.contact_stiffness);
    d.pad_half_width = g.value("pad_half_width", d.pad_half_width);
    d.friction_mu = g.value("friction_mu", d.friction_mu);
    d.corner_tolerance = g.value("corner_tolerance", d.corner_tolerance);
  }
  if (j.contains("finger_model")) {
    const json& f = j.at("finger_model");
    FingerModelParams& d = scene.finger_model;
    d.curvature_gain_db = f.value("curvature_gain_db", d.curvature_gain_db);
    d.saturation_db = f.value("saturation_db", d.saturation_db);
    d.noise_db = f.value("noise_db", d.noise_db);
    d.normal_stiffness = f.value("normal_stiffness", d.normal_stiffness);
    d.tangential_stiffness = f.value("tangential_stiffness", d.tangential_stiffness);
    d.torsional_stiffness = f.value("torsional_stiffness", d.torsional_stiffness);
    d.pad_half_width = f.value("pad_half_width", d.pad_half_width);
    d.sensitivity_jitter = f.value("sensitivity_jitter", d.sensitivity_jitter);
    d.sensor_seed = f.value("sensor_seed", d.sensor_seed);
  }
  if (j.contains("press")) {
    const json& p = j.at("press");
    PressSpec& d = scene.press;
    d.max_depth = p.value("max_depth", d.max_depth);
    d.max_twist = p.value("max_twist", d.max_twist);
    d.zero_twist_prob = p.value("zero_twist_prob", d.zero_twist_prob);
    d.max_offset = p.value("max_offset", d.max_offset);
  }
  if (j.contains("pose_noise")) {
    const json& n = j.at("pose_noise");
    PoseNoiseSpec& d = scene.pose_noise;
    d.translation_radius = n.value("translation_radius", d.translation_radius);
    d.rotation_range = n.value("rotation_range", d.rotation_range);
  }
  scene.default_axis = j.value("default_axis", scene.default_axis);
  if (j.contains("objects")) {
    scene.objects.clear();
    for (const json& o : j.at("objects")) {
      SceneObjectRef ref;
      ref.id = o.at("id").get<std::string>();
      ref.shape = shape_from_json(o.at("shape"));
      ref.class_hint = o.value("class_hint", std::string{});
      scene.objects.push_back(std::move(ref));
    }
  }
  scene.validate();
  return scene;
}

ParamsConfig load_params(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  ParamsConfig params = ParamsConfig::defaults();
  if (j.contains("optimizer")) {
    const json& o = j.at("optimizer");
    OptimizationParams& d = params.optimizer;
    d.torque_tolerance = o.value("torque_tolerance", d.torque_tolerance);
    d.force_tolerance = o.value("force_tolerance", d.force_tolerance);
    d.initial_step = o.value("initial_step", d.initial_step);
    d.max_torque_iterations = o.value("max_torque_iterations", d.max_torque_iterations);
    d.max_friction_iterations = o.value("max_friction_iterations", d.max_friction_iterations);
    d.min_grip_force = o.value("min_grip_force", d.min_grip_force);
    d.grip_total = o.value("grip_total", d.grip_total);
    if (o.contains("preferences")) {
      d.preferences.clear();
      for (const auto& [key, value] : o.at("preferences").items())
        d.preferences[key] = mode_from_name(value.get<std::string>());
    }
  }
  if (j.contains("fit")) {
    const json& f = j.at("fit");
    FitOptions& d = params.fit;
    d.ridge_lambda = f.value("ridge_lambda", d.ridge_lambda);
    d.tau_z = f.value("tau_z", d.tau_z);
    d.holdout_fraction = f.value("holdout_fraction", d.holdout_fraction);
    d.split_seed = f.value("split_seed", d.split_seed);
  }
  params.samples_per_finger = j.value("samples_per_finger", params.samples_per_finger);
  if (j.contains("disturbance")) {
    const json& s = j.at("disturbance");
    DisturbanceSpec& d = params.disturbance;
    if (s.contains("amplitudes")) d.amplitudes = s.at("amplitudes").get<std::vector<double>>();
    d.external_torque = s.value("external_torque", d.external_torque);
  }
  params.trials_per_object = j.value("trials_per_object", params.trials_per_object);
  params.validate();
  return params;
}

void save_scene(const std::filesystem::path& path, const SceneConfig& scene) {
  scene.validate();
  ordered_json j;
  j["gripper"] = {{"base_radius", scene.gripper.base_radius},
                  {"parallel_offset", scene.gripper.parallel_offset},
                  {"max_compression", scene.gripper.max_compression},
                  {"contact_stiffness", scene.gripper.contact_stiffness},
                  {"pad_half_width", scene.gripper.pad_half_width},
                  {"friction_mu", scene.gripper.friction_mu},
                  {"corner_tolerance", scene.gripper.corner_tolerance}};
  j["finger_model"] = {{"curvature_gain_db", scene.finger_model.curvature_gain_db},
                       {"saturation_db", scene.finger_model.saturation_db},
                       {"noise_db", scene.finger_model.noise_db},
                       {"normal_stiffness", scene.finger_model.normal_stiffness},
                       {"tangential_stiffness", scene.finger_model.tangential_stiffness},
                       {"torsional_stiffness", scene.finger_model.torsional_stiffness},
                       {"pad_half_width", scene.finger_model.pad_half_width},
                       {"sensitivity_jitter", scene.finger_model.sensitivity_jitter},
                       {"sensor_seed", scene.finger_model.sensor_seed}};
  j["press"] = {{"max_depth", scene.press.max_depth},
                {"max_twist", scene.press.max_twist},
                {"zero_twist_prob", scene.press.zero_twist_prob},
                {"max_offset", scene.press.max_offset}};
  j["pose_noise"] = {{"translation_radius", scene.pose_noise.translation_radius},
                     {"rotation_range", scene.pose_noise.rotation_range}};
  j["default_axis"] = scene.default_axis;
  j["objects"] = ordered_json::array();
  for (const SceneObjectRef& object : scene.objects) {
    ordered_json o;
    o["id"] = object.id;
    o["shape"] = shape_to_json(object.shape);
    o["class_hint"] = object.class_hint;
    j["objects"].push_back(std::move(o));
  }
  write_json_file(path, j);
}

void save_params(const std::filesystem::path& path, const ParamsConfig& params) {
  params.validate();
  ordered_json j;
  ordered_json prefs;
  for (const auto& [key, value] : params.optimizer.preferences) prefs[key] = mode_name(value);
  j["optimizer"] = {{"torque_tolerance", params.optimizer.torque_tolerance},
                    {"force_tolerance", params.optimizer.force_tolerance},
                    {"initial_step", params.optimizer.initial_step},
                    {"max_torque_iterations", params.optimizer.max_torque_iterations},
                    {"max_friction_iterations", params.optimizer.max_friction_iterations},
                    {"min_grip_force", params.optimizer.min_grip_force},
                    {"grip_total", params.optimizer.grip_total},
                    {"preferences", prefs}};
  j["fit"] = {{"ridge_lambda", params.fit.ridge_lambda},
              {"tau_z", params.fit.tau_z},
              {"holdout_fraction", params.fit.holdout_fraction},
              {"split_seed", params.fit.split_seed}};
  j["samples_per_finger"] = params.samples_per_finger;
  j["disturbance"] = {{"amplitudes", params.disturbance.amplitudes},
                      {"external_torque", params.disturbance.external_torque}};
  j["trials_per_object"] = params.trials_per_object;
  write_json_file(path, j);
}

}  // namespace softgrasp
