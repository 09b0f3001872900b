#pragma once

#include <filesystem>

#include "softgrasp/harness.hpp"

namespace softgrasp {

// World description: gripper constants, synthetic finger response, press
// bounds for calibration, pose noise, and the object set.
struct SceneConfig {
  GripperGeometry gripper;
  FingerModelParams finger_model;
  PressSpec press;
  PoseNoiseSpec pose_noise;
  double default_axis = deg2rad(90.0);  // first-finger direction of the initial grasp
  std::vector<SceneObjectRef> objects;

  static SceneConfig defaults();
  void validate() const;
};

// Algorithm settings: optimization loop, calibration fit, disturbance ladder.
struct ParamsConfig {
  OptimizationParams optimizer;
  FitOptions fit;
  int samples_per_finger = 2000;
  DisturbanceSpec disturbance;
  int trials_per_object = 20;

  static ParamsConfig defaults();
  void validate() const;
};

SceneConfig load_scene(const std::filesystem::path& path);
ParamsConfig load_params(const std::filesystem::path& path);
void save_scene(const std::filesystem::path& path, const SceneConfig& scene);
void save_params(const std::filesystem::path& path, const ParamsConfig& params);

}  // namespace softgrasp
