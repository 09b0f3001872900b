#pragma once

#include <map>
#include <optional>
#include <string>

#include "softgrasp/calibration.hpp"
#include "softgrasp/mechanics.hpp"
#include "softgrasp/scene.hpp"
#include "softgrasp/sensor.hpp"

namespace softgrasp {

struct OptimizationParams {
  double torque_tolerance = 0.01;  // N*m certificate bound per finger
  double force_tolerance = 0.1;    // N bound on the residual normal-force sum
  double initial_step = deg2rad(5.0);  // proximal rotation step, halved on sign flips
  int max_torque_iterations = 50;
  int max_friction_iterations = 50;
  double min_grip_force = 1.0;  // N floor per engaged finger
  double grip_total = 30.0;     // N, held constant through rebalancing
  std::map<std::string, BaseMode> preferences;  // shape class -> base mode

  static std::map<std::string, BaseMode> default_preferences();
  void validate() const;
};

enum class ShapeClass { Round, Square, Rectangle, Unknown };

std::string to_string(ShapeClass c);

// Contact-pattern summary of an initial grasp: an antipodal face pair (axis +
// measured extents) points at a flat-sided object; normals concurrent in one
// point read as round.
struct TactileSummary {
  ShapeClass shape_class = ShapeClass::Unknown;
  double pair_axis = 0.0;  // direction of the antipodal pair normal, rad
  double pair_width = 0.0;
  double cross_extent = 0.0;
};

TactileSummary classify_contacts(const ContactSet& contacts);

BaseMode select_base_configuration(const std::string& shape_class,
                                   const std::map<std::string, BaseMode>& preferences);

// Sensing stack for one gripper: ground-truth fiber response per finger plus
// the calibrated readout models.
struct Perception {
  std::array<FingerResponseModel, 3> response;
  std::array<CalibrationModel, 3> readout;

  Prediction read(int finger, const ContactPatch& patch, double twist, Rng& rng) const;
};

// Ground-truth mechanical state of a contact set under the current commands.
GraspState make_grasp_state(const ObjectShape& object, const ContactSet& contacts,
                            const std::array<FingerResponseModel, 3>& response, double mu);

struct TorqueResult {
  GripperConfiguration config;
  int iterations = 0;
  bool converged = false;
};

// Sign-driven alignment: senses each engaged finger, and while any predicted
// twist sign is nonzero rotates that finger's proximal joint by -sign * step,
// halving the finger's step whenever its sign flips.
TorqueResult torque_optimize(const ObjectShape& object, GripperConfiguration config,
                             const Perception& perception, const OptimizationParams& params,
                             const GripperGeometry& geom, Rng& rng);

struct FrictionResult {
  GraspState state;
  std::array<double, 3> magnitudes{0.0, 0.0, 0.0};  // commanded normal forces
  int iterations = 0;
  bool balanced = false;
};

// Redistributes the fixed total grip force across the engaged contacts to
// minimize the residual normal-force sum (equality-constrained nonnegative
// least squares, exact active-set enumeration), then re-closes the tangential
// balance at the new commands.
FrictionResult friction_optimize(const GraspState& state, const GripperConfiguration& config,
                                 const OptimizationParams& params);

// In Lateral mode, once the symmetric pair holds antipodal contact the
// mid-plane finger is redundant and is deactivated.
GripperConfiguration release_finger_if_needed(const ObjectShape& object,
                                              const GripperConfiguration& config,
                                              const GripperGeometry& geom);

struct FingerReading {
  bool in_contact = false;
  double predicted_force = 0.0;
  int predicted_sign = 0;
};

struct OptimizedGrasp {
  std::string policy = "interactive";
  GripperConfiguration initial_config;
  GripperConfiguration final_config;
  GraspState initial_state;
  GraspState final_state;
  std::array<FingerReading, 3> initial_readings;
  TactileSummary summary;
  std::string shape_class_used;
  double margin_before = 0.0;
  double margin_after = 0.0;
  int torque_iterations = 0;
  int friction_iterations = 0;
  bool torque_converged = false;
  bool friction_balanced = false;
  bool grasp_failed = false;  // fewer than two contacts at some phase
  std::uint64_t seed = 0;
};

// Closed-loop pipeline: initial squeeze (Circular unless a start is given),
// tactile readout, base-configuration selection, torque alignment, optional
// finger release, force rebalancing.
OptimizedGrasp interactive_grasp(const ObjectShape& object, const GripperGeometry& geom,
                                 const OptimizationParams& params, const Perception& perception,
                                 Rng& rng, const std::string& class_hint = "",
                                 const std::optional<GripperConfiguration>& start = std::nullopt);

// Open-loop baseline: one Circular squeeze at equal commands, no sensing.
OptimizedGrasp conventional_grasp(const ObjectShape& object, const GripperGeometry& geom,
                                  const OptimizationParams& params,
                                  const std::array<FingerResponseModel, 3>& response,
                                  double axis = deg2rad(90.0));

}  // namespace softgrasp
