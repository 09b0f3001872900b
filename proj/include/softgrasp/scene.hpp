#pragma once

#include <array>
#include <optional>
#include <vector>

#include "softgrasp/geometry.hpp"
#include "softgrasp/rng.hpp"

namespace softgrasp {

enum class ShapeKind { Circle, Square, Rectangle, Triangle };

struct Pose {
  Vec2 position{0.0, 0.0};
  double orientation = 0.0;  // rad, stored wrapped to [0, 2*pi)
};

// Planar cross-sections of the graspable object set. Ball/cylinder map to a
// circle, cube to a square, cuboid to a rectangle, prism to an equilateral
// triangle (centroid at the pose position, one vertex up at orientation 0).
struct ObjectShape {
  ShapeKind kind = ShapeKind::Circle;
  double radius = 0.0;              // circle only
  double width = 0.0, height = 0.0;  // rectangle; square/triangle keep side in width
  Pose pose;

  static ObjectShape circle(double radius, Pose pose = {});
  static ObjectShape square(double side, Pose pose = {});
  static ObjectShape rectangle(double width, double height, Pose pose = {});
  static ObjectShape triangle(double side, Pose pose = {});

  double side() const { return width; }
  void validate() const;
};

// World-frame vertices, counterclockwise; empty for circles.
std::vector<Vec2> boundary_vertices(const ObjectShape& shape);
double boundary_perimeter(const ObjectShape& shape);

enum class BaseMode { Circular, Lateral, Parallel };

struct FingerPose {
  double proximal = 0.0;      // base angle on the mount circle, rad about gripper Z
  double distal = 0.0;        // approach-ray deviation from the mode direction, rad
  double grip_command = 0.0;  // commanded squeeze, N
  bool active = true;
};

struct GripperGeometry {
  double base_radius = 0.10;          // finger mount circle, m
  double parallel_offset = 0.012;     // lateral half-spacing of the parallel pair, m
  double max_compression = 0.010;     // soft-pad depth clamp, m
  double contact_stiffness = 2000.0;  // N/m, shared with the finger response model
  double pad_half_width = 0.008;      // m
  double friction_mu = 0.8;
  double corner_tolerance = 1e-7;     // vertex snap distance for bisector normals, m
  void validate() const;
};

// Finger 0 is the distinguished finger of non-circular modes: the mid-plane
// finger of Lateral (released for two-finger pinches), the lone opposing
// finger of Parallel. Torque trims move `proximal` per finger; the mode axis
// records the layout the configuration was built around.
struct GripperConfiguration {
  BaseMode mode = BaseMode::Circular;
  double mode_axis = 0.0;
  std::array<FingerPose, 3> fingers;

  static GripperConfiguration circular(double axis, double grip_command);
  static GripperConfiguration lateral(double axis, double grip_command);
  static GripperConfiguration parallel(double axis, double grip_command,
                                       const GripperGeometry& geom);

  int active_count() const;
  void validate() const;
};

struct ApproachRay {
  Vec2 origin;
  Vec2 direction;  // unit
};

ApproachRay approach_ray(const GripperConfiguration& config, const GripperGeometry& geom,
                         int finger);

struct ContactPatch {
  Vec2 point;           // on the object boundary
  Vec2 normal;          // inward unit surface normal
  double depth = 0.0;   // soft-pad compression, m
  double extent = 0.0;  // conformed contact length, m
};

struct FingerContact {
  ContactPatch patch;
  // Signed angle from the inward normal to the approach direction; zero on
  // circular boundaries, where the arc re-centers the conforming pad.
  double twist = 0.0;
  double normal_force = 0.0;  // reaction at the solved compression, N
};

using ContactSet = std::array<std::optional<FingerContact>, 3>;

// Casts each active finger's approach ray at the object, takes the first
// boundary crossing (none on a miss, a tangent graze, or a ray starting
// inside), and solves the pad compression that balances the grip command,
// clamped at max_compression. Corner hits within corner_tolerance of a vertex
// get the angle-bisector normal.
ContactSet resolve_contacts(const ObjectShape& object, const GripperConfiguration& config,
                            const GripperGeometry& geom);

// Conformable contact length around the boundary point at arclength fraction
// u in [0,1), for a press of the given depth. Used by the calibration press
// sampler; grasp-path extents come out of resolve_contacts.
double local_contact_extent(const ObjectShape& shape, double arclength_fraction, double depth,
                            double pad_half_width);

struct PoseNoiseSpec {
  double translation_radius = 0.004;      // uniform disc, m
  double rotation_range = deg2rad(10.0);  // uniform in +/- range, rad
  void validate() const;
};

ObjectShape perturb_pose(const ObjectShape& object, const PoseNoiseSpec& noise, Rng& rng);

}  // namespace softgrasp
