#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "softgrasp/sensor.hpp"

namespace softgrasp {

struct SensorSample {
  DeformationVector deformation;
  ReactionWrench wrench;
};

struct PressSpec {
  double max_depth = 0.010;     // m
  double max_twist = 0.30;      // rad
  double zero_twist_prob = 0.5; // fraction of straight pushes
  double max_offset = 0.008;    // m
  void validate() const;
};

// Random presses of the object set against one finger: uniform object pick,
// uniform boundary location (sets the conformed extent), uniform depth,
// straight push with probability zero_twist_prob else uniform twist, uniform
// centroid offset. max_depth == 0 forces no-contact samples (all-zero load).
std::vector<SensorSample> generate_dataset(std::span<const ObjectShape> objects, int count,
                                           const FingerResponseModel& model,
                                           const PressSpec& press, Rng& rng);

void save_dataset_csv(const std::filesystem::path& path,
                      const std::vector<SensorSample>& samples);
std::vector<SensorSample> load_dataset_csv(const std::filesystem::path& path);

struct FitOptions {
  double ridge_lambda = 1e-6;
  double tau_z = 0.005;           // N*m dead band for the torque-sign labels
  double holdout_fraction = 0.2;  // seeded shuffle split
  std::uint64_t split_seed = 1;
  void validate() const;
};

struct CalibrationMetrics {
  double fn_rmse = 0.0, fn_r2 = 0.0;
  double tz_rmse = 0.0, tz_r2 = 0.0;
  double sign_success = 0.0;
};

// Ridge regressions on normalized fiber losses for the normal force and the
// twisting torque; the torque sign is the regressed torque pushed through the
// tau_z dead band. Metrics are held-out.
struct CalibrationModel {
  Eigen::VectorXd fn_weights;
  double fn_intercept = 0.0;
  Eigen::VectorXd tz_weights;
  double tz_intercept = 0.0;
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_scale;
  double tau_z = 0.005;
  double ridge_lambda = 1e-6;
  std::uint64_t split_seed = 0;
  std::size_t train_count = 0, test_count = 0;
  CalibrationMetrics metrics;
};

CalibrationModel fit(const std::vector<SensorSample>& samples, const FitOptions& options = {});

struct Prediction {
  double normal_force = 0.0;
  int torque_sign = 0;  // -1, 0, +1
};

Prediction predict(const CalibrationModel& model, const DeformationVector& deformation);

int sign_label(double tz, double tau_z);

double rmse(std::span<const double> truth, std::span<const double> predicted);
// Coefficient of determination; domain error when the truth has no variance.
double r_squared(std::span<const double> truth, std::span<const double> predicted);
double classification_success_rate(std::span<const int> truth, std::span<const int> predicted);

void save_model_json(const std::filesystem::path& path, const CalibrationModel& model);
CalibrationModel load_model_json(const std::filesystem::path& path);

}  // namespace softgrasp
