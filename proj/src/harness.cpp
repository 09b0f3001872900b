#include "softgrasp/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace softgrasp {
namespace {

std::string fmt_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << content;
  out.close();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

void DisturbanceSpec::validate() const {
  double prev = 0.0;
  for (double a : amplitudes) {
    if (!std::isfinite(a) || a < 0.0) throw std::invalid_argument("disturbance amplitudes must be finite and nonnegative");
    if (a < prev) throw std::invalid_argument("disturbance amplitudes must be nondecreasing");
    prev = a;
  }
  if (!std::isfinite(external_torque) || external_torque < 0.0)
    throw std::invalid_argument("external torque must be finite and nonnegative");
}

TrialResult shake_test(const OptimizedGrasp& grasp, const DisturbanceSpec& spec) {
  spec.validate();
  TrialResult result;
  result.policy = grasp.policy;
  result.seed = grasp.seed;
  if (grasp.grasp_failed || !grasp.final_state.equilibrated) {
    return result;  // never held the object: fails outright, resists nothing
  }
  result.margin = anti_disturbance_margin(grasp.final_state);
  if (spec.external_torque > torque_capacity(grasp.final_state)) {
    // spins free as soon as the shaking starts
    result.failure_amplitude = spec.amplitudes.empty() ? 0.0 : spec.amplitudes.front();
    return result;
  }
  for (double a : spec.amplitudes) {
    if (a > result.margin) {
      result.failure_amplitude = a;
      return result;
    }
  }
  result.success = true;
  return result;
}

ComparisonReport run_comparison(const std::vector<SceneObjectRef>& objects, int n_trials,
                                const GripperGeometry& geom, const PoseNoiseSpec& noise,
                                const OptimizationParams& params, const Perception& perception,
                                const DisturbanceSpec& disturbance, std::uint64_t master_seed,
                                double default_axis) {
  if (n_trials < 1) throw std::invalid_argument("run_comparison: n_trials must be >= 1");
  geom.validate();
  noise.validate();
  params.validate();
  disturbance.validate();

  ComparisonReport report;
  report.master_seed = master_seed;
  report.n_trials = n_trials;
  for (const SceneObjectRef& object : objects) {
    ComparisonRow row;
    row.object_id = object.id;
    row.n_trials = n_trials;
    for (int trial = 0; trial < n_trials; ++trial) {
      const std::uint64_t trial_seed =
          SeedMix(master_seed).mix("trial").mix(object.id).mix(trial).value();
      Rng pose_rng = SeedMix(trial_seed).mix("pose").rng();
      const ObjectShape placed = perturb_pose(object.shape, noise, pose_rng);

      OptimizedGrasp conventional =
          conventional_grasp(placed, geom, params, perception.response, default_axis);
      conventional.seed = trial_seed;
      TrialResult conv = shake_test(conventional, disturbance);
      conv.object_id = object.id;
      row.conventional_successes += conv.success ? 1 : 0;
      report.trials.push_back(conv);

      Rng episode_rng = SeedMix(trial_seed).mix("episode").rng();
      const GripperConfiguration start =
          GripperConfiguration::circular(default_axis, params.grip_total / 3.0);
      OptimizedGrasp interactive = interactive_grasp(placed, geom, params, perception, episode_rng,
                                                     object.class_hint, start);
      interactive.seed = trial_seed;
      TrialResult inter = shake_test(interactive, disturbance);
      inter.object_id = object.id;
      row.interactive_successes += inter.success ? 1 : 0;
      report.trials.push_back(inter);
    }
    report.rows.push_back(row);
  }
  return report;
}

void emit_report(const ComparisonReport& report, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  nlohmann::ordered_json doc;
  doc["master_seed"] = report.master_seed;
  doc["n_trials"] = report.n_trials;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const ComparisonRow& row : report.rows) {
    doc["rows"].push_back({{"object_id", row.object_id},
                           {"conventional_successes", row.conventional_successes},
                           {"interactive_successes", row.interactive_successes},
                           {"n_trials", row.n_trials}});
  }
  doc["trials"] = nlohmann::ordered_json::array();
  for (const TrialResult& t : report.trials) {
    doc["trials"].push_back({{"object_id", t.object_id},
                             {"policy", t.policy},
                             {"success", t.success},
                             {"failure_amplitude", t.failure_amplitude},
                             {"margin", t.margin},
                             {"seed", t.seed}});
  }

  std::string table = "object,conventional_successes,interactive_successes,n_trials\n";
  for (const ComparisonRow& row : report.rows) {
    table += row.object_id + ',' + std::to_string(row.conventional_successes) + ',' +
             std::to_string(row.interactive_successes) + ',' + std::to_string(row.n_trials) + '\n';
  }

  // per-trial margins for distribution plots; trial index counts within each
  // (object, policy) cell in emission order
  std::string plot = "object,policy,trial,margin,success,failure_amplitude\n";
  std::map<std::string, int> counters;
  for (const TrialResult& t : report.trials) {
    const int index = counters[t.object_id + '/' + t.policy]++;
    plot += t.object_id + ',' + t.policy + ',' + std::to_string(index) + ',' + fmt_g9(t.margin) +
            ',' + (t.success ? "1" : "0") + ',' + fmt_g9(t.failure_amplitude) + '\n';
  }

  const fs::path json_path = out_dir / "results.json";
  const fs::path table_path = out_dir / "table.csv";
  const fs::path plot_path = out_dir / "plotdata.csv";
  write_file(json_path.string() + ".tmp", doc.dump(2) + "\n");
  write_file(table_path.string() + ".tmp", table);
  write_file(plot_path.string() + ".tmp", plot);
  fs::rename(json_path.string() + ".tmp", json_path);
  fs::rename(table_path.string() + ".tmp", table_path);
  fs::rename(plot_path.string() + ".tmp", plot_path);
}

}  // namespace softgrasp
