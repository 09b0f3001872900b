#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "softgrasp/config.hpp"

namespace softgrasp {

// Subcommand bodies behind the CLI; tests drive these directly. All file
// outputs are written to temp names and renamed into place, so a failure
// leaves no partial files.

struct CalibrateOutcome {
  std::array<CalibrationMetrics, 3> metrics;
  std::vector<std::filesystem::path> outputs;
};

// Per finger: synthesizes a press dataset, fits the readout model, writes
// dataset_finger<i>.csv + model_finger<i>.json + metrics.csv.
CalibrateOutcome run_calibrate(const SceneConfig& scene, const ParamsConfig& params,
                               std::uint64_t seed, const std::filesystem::path& out_dir);

// Loads the three readout models from model_dir.
Perception load_perception(const SceneConfig& scene, const std::filesystem::path& model_dir);

struct GraspOutcome {
  OptimizedGrasp grasp;
  std::filesystem::path output;
  std::string summary;  // human-readable transition report
};

// One interactive episode on the object's declared pose.
GraspOutcome run_grasp(const SceneConfig& scene, const ParamsConfig& params, std::uint64_t seed,
                       const std::string& object_id, const std::filesystem::path& model_dir,
                       const std::filesystem::path& out_dir);

struct EvaluateOutcome {
  ComparisonReport report;
  std::vector<std::filesystem::path> outputs;
};

// Paired-policy comparison over the scene's objects (optionally filtered),
// emitting results.json, table.csv and plotdata.csv.
EvaluateOutcome run_evaluate(const SceneConfig& scene, const ParamsConfig& params,
                             std::uint64_t seed, const std::vector<std::string>& object_filter,
                             const std::filesystem::path& model_dir,
                             const std::filesystem::path& out_dir);

// Rebuilds table.csv and plotdata.csv from an existing results.json.
std::vector<std::filesystem::path> run_report(const std::filesystem::path& results_json,
                                              const std::filesystem::path& out_dir);

}  // namespace softgrasp
