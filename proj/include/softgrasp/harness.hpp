#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "softgrasp/optimizer.hpp"

namespace softgrasp {

struct DisturbanceSpec {
  std::vector<double> amplitudes{3.0, 6.0, 9.0, 12.0, 15.0};  // N, nondecreasing
  double external_torque = 0.0;                               // N*m
  void validate() const;
};

struct TrialResult {
  std::string object_id;
  std::string policy;  // "conventional" | "interactive"
  bool success = false;
  double failure_amplitude = 0.0;  // first amplitude exceeding the margin; 0 when never equilibrated
  double margin = 0.0;
  std::uint64_t seed = 0;
};

// Pull-force ladder: a grasp that never equilibrated fails outright;
// otherwise it survives while each amplitude stays within the margin and the
// external torque within the torque capacity.
TrialResult shake_test(const OptimizedGrasp& grasp, const DisturbanceSpec& spec);

struct SceneObjectRef {
  std::string id;
  ObjectShape shape;
  std::string class_hint;  // optional side-grasp preference
};

struct ComparisonRow {
  std::string object_id;
  int conventional_successes = 0;
  int interactive_successes = 0;
  int n_trials = 0;
};

struct ComparisonReport {
  std::uint64_t master_seed = 0;
  int n_trials = 0;
  std::vector<ComparisonRow> rows;
  std::vector<TrialResult> trials;  // object order, then trial, conventional before interactive
};

// Paired trials: each (object, trial index) draws one perturbed pose from the
// master seed and runs both policies on it.
ComparisonReport run_comparison(const std::vector<SceneObjectRef>& objects, int n_trials,
                                const GripperGeometry& geom, const PoseNoiseSpec& noise,
                                const OptimizationParams& params, const Perception& perception,
                                const DisturbanceSpec& disturbance, std::uint64_t master_seed,
                                double default_axis = deg2rad(90.0));

// Writes results.json, table.csv and plotdata.csv (written to temp names,
// renamed into place together). Deterministic bytes for a given report.
void emit_report(const ComparisonReport& report, const std::filesystem::path& out_dir);

}  // namespace softgrasp
