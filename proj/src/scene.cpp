#include "softgrasp/scene.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace softgrasp {

namespace {

Pose wrapped(Pose p) {
  p.orientation = normalize_angle(p.orientation);
  return p;
}

}  // namespace

ObjectShape ObjectShape::circle(double radius, Pose pose) {
  ObjectShape s;
  s.kind = ShapeKind::Circle;
  s.radius = radius;
  s.pose = wrapped(pose);
  s.validate();
  return s;
}

ObjectShape ObjectShape::square(double side, Pose pose) {
  ObjectShape s;
  s.kind = ShapeKind::Square;
  s.width = s.height = side;
  s.pose = wrapped(pose);
  s.validate();
  return s;
}

ObjectShape ObjectShape::rectangle(double width, double height, Pose pose) {
  ObjectShape s;
  s.kind = ShapeKind::Rectangle;
  s.width = width;
  s.height = height;
  s.pose = wrapped(pose);
  s.validate();
  return s;
}

ObjectShape ObjectShape::triangle(double side, Pose pose) {
  ObjectShape s;
  s.kind = ShapeKind::Triangle;
  s.width = s.height = side;
  s.pose = wrapped(pose);
  s.validate();
  return s;
}

void ObjectShape::validate() const {
  const bool ok = kind == ShapeKind::Circle
                      ? radius > 0.0 && std::isfinite(radius)
                      : width > 0.0 && height > 0.0 && std::isfinite(width) && std::isfinite(height);
  if (!ok) throw std::invalid_argument("object dimensions must be positive and finite");
  if (!std::isfinite(pose.position.x()) || !std::isfinite(pose.position.y()) ||
      !std::isfinite(pose.orientation))
    throw std::invalid_argument("object pose must be finite");
  if (pose.orientation < 0.0 || pose.orientation >= kTwoPi)
    throw std::invalid_argument("object orientation must lie in [0, 2*pi)");
}

std::vector<Vec2> boundary_vertices(const ObjectShape& shape) {
  std::vector<Vec2> local;
  switch (shape.kind) {
    case ShapeKind::Circle:
      return {};
    case ShapeKind::Square:
    case ShapeKind::Rectangle: {
      const double hw = shape.width / 2.0, hh = shape.height / 2.0;
      local = {{hw, -hh}, {hw, hh}, {-hw, hh}, {-hw, -hh}};
      break;
    }
    case ShapeKind::Triangle: {
      // Equilateral, centroid at origin, one vertex up.
      const double rc = shape.width / std::sqrt(3.0);
      local = {unit_vector(kPi / 2.0) * rc, unit_vector(kPi / 2.0 + 2.0 * kPi / 3.0) * rc,
               unit_vector(kPi / 2.0 + 4.0 * kPi / 3.0) * rc};
      break;
    }
  }
  std::vector<Vec2> world;
  world.reserve(local.size());
  for (const Vec2& v : local) world.push_back(rotate(v, shape.pose.orientation) + shape.pose.position);
  return world;
}

double boundary_perimeter(const ObjectShape& shape) {
  if (shape.kind == ShapeKind::Circle) return kTwoPi * shape.radius;
  const auto verts = boundary_vertices(shape);
  double p = 0.0;
  for (std::size_t i = 0; i < verts.size(); ++i)
    p += (verts[(i + 1) % verts.size()] - verts[i]).norm();
  return p;
}

void GripperGeometry::validate() const {
  if (!(base_radius > 0.0) || !(max_compression > 0.0) || !(contact_stiffness > 0.0) ||
      !(pad_half_width > 0.0) || !(friction_mu > 0.0) || !(corner_tolerance >= 0.0) ||
      !(parallel_offset > 0.0))
    throw std::invalid_argument("gripper geometry constants must be positive");
  if (parallel_offset >= base_radius)
    throw std::invalid_argument("parallel finger offset must stay inside the base circle");
}

GripperConfiguration GripperConfiguration::circular(double axis, double grip_command) {
  GripperConfiguration c;
  c.mode = BaseMode::Circular;
  c.mode_axis = normalize_angle(axis);
  for (int i = 0; i < 3; ++i) {
    c.fingers[i].proximal = normalize_angle(axis + i * kTwoPi / 3.0);
    c.fingers[i].grip_command = grip_command;
  }
  return c;
}

GripperConfiguration GripperConfiguration::lateral(double axis, double grip_command) {
  GripperConfiguration c;
  c.mode = BaseMode::Lateral;
  c.mode_axis = normalize_angle(axis);
  const double offsets[3] = {0.0, kPi / 2.0, -kPi / 2.0};  // mid-plane finger first
  for (int i = 0; i < 3; ++i) {
    c.fingers[i].proximal = normalize_angle(axis + offsets[i]);
    c.fingers[i].grip_command = grip_command;
  }
  return c;
}

GripperConfiguration GripperConfiguration::parallel(double axis, double grip_command,
                                                    const GripperGeometry& geom) {
  GripperConfiguration c;
  c.mode = BaseMode::Parallel;
  c.mode_axis = normalize_angle(axis);
  const double spread = std::asin(geom.parallel_offset / geom.base_radius);
  const double offsets[3] = {0.0, kPi - spread, kPi + spread};  // lone finger first
  for (int i = 0; i < 3; ++i) {
    c.fingers[i].proximal = normalize_angle(axis + offsets[i]);
    c.fingers[i].grip_command = grip_command;
  }
  return c;
}

int GripperConfiguration::active_count() const {
  int n = 0;
  for (const auto& f : fingers) n += f.active ? 1 : 0;
  return n;
}

void GripperConfiguration::validate() const {
  if (active_count() < 2) throw std::invalid_argument("a grasp needs at least two active fingers");
  for (const auto& f : fingers) {
    if (!std::isfinite(f.proximal) || !std::isfinite(f.distal) || !std::isfinite(f.grip_command))
      throw std::invalid_argument("finger pose must be finite");
    if (f.grip_command < 0.0) throw std::invalid_argument("grip command must be nonnegative");
  }
}

ApproachRay approach_ray(const GripperConfiguration& config, const GripperGeometry& geom,
                         int finger) {
  if (finger < 0 || finger > 2) throw std::invalid_argument("finger index out of range");
  const FingerPose& f = config.fingers[finger];
  ApproachRay ray;
  ray.origin = geom.base_radius * unit_vector(f.proximal);
  ray.direction = rotate(-unit_vector(f.proximal), f.distal);
  return ray;
}

namespace {

struct BoundaryHit {
  double t = 0.0;
  Vec2 point{0.0, 0.0};
  Vec2 inward_normal{0.0, 0.0};
  bool corner = false;
  // Edge-local context for the conformable extent (polygons only).
  double dist_to_prev_vertex = 0.0;
  double dist_to_next_vertex = 0.0;
};

std::optional<BoundaryHit> hit_circle(const ObjectShape& shape, const ApproachRay& ray) {
  const Vec2 oc = ray.origin - shape.pose.position;
  const double b = oc.dot(ray.direction);
  const double c = oc.squaredNorm() - shape.radius * shape.radius;
  const double disc = b * b - c;
  // Tangent-within-tolerance grazes count as misses.
  if (disc <= 1e-12 * shape.radius * shape.radius) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double t_enter = -b - sq, t_exit = -b + sq;
  if (t_enter <= 0.0) return std::nullopt;  // starts inside or behind
  (void)t_exit;
  BoundaryHit h;
  h.t = t_enter;
  h.point = ray.origin + t_enter * ray.direction;
  h.inward_normal = (shape.pose.position - h.point).normalized();
  return h;
}

std::optional<BoundaryHit> hit_polygon(const ObjectShape& shape, const ApproachRay& ray,
                                       double corner_tol) {
  const auto verts = boundary_vertices(shape);
  const std::size_t n = verts.size();
  std::optional<BoundaryHit> best;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = verts[i];
    const Vec2& b = verts[(i + 1) % n];
    const Vec2 e = b - a;
    const double denom = cross2(ray.direction, e);
    if (std::abs(denom) < 1e-15) continue;  // parallel graze
    const double t = cross2(a - ray.origin, e) / denom;
    const double s = cross2(a - ray.origin, ray.direction) / denom;
    if (t <= 1e-12 || s < -1e-12 || s > 1.0 + 1e-12) continue;
    if (best && t >= best->t - 1e-15) continue;
    BoundaryHit h;
    h.t = t;
    h.point = ray.origin + t * ray.direction;
    h.inward_normal = perp(e).normalized();  // CCW polygon: +90 of the edge points inward
    h.dist_to_prev_vertex = (h.point - a).norm();
    h.dist_to_next_vertex = (h.point - b).norm();
    // Vertex snap: angle-bisector normal of the two adjacent edges.
    const bool at_a = h.dist_to_prev_vertex <= corner_tol;
    const bool at_b = h.dist_to_next_vertex <= corner_tol;
    if (at_a || at_b) {
      const std::size_t vi = at_a ? i : (i + 1) % n;
      const Vec2 e_prev = verts[vi] - verts[(vi + n - 1) % n];
      const Vec2 e_next = verts[(vi + 1) % n] - verts[vi];
      h.corner = true;
      h.point = verts[vi];
      h.inward_normal = (perp(e_prev).normalized() + perp(e_next).normalized()).normalized();
    }
    best = h;
  }
  if (best && ray.direction.dot(best->inward_normal) <= 1e-9) return std::nullopt;  // grazing away
  return best;
}

std::optional<BoundaryHit> first_hit(const ObjectShape& shape, const ApproachRay& ray,
                                     double corner_tol) {
  return shape.kind == ShapeKind::Circle ? hit_circle(shape, ray)
                                         : hit_polygon(shape, ray, corner_tol);
}

// Conformed contact length at compression depth d.
double extent_at(const ObjectShape& shape, const BoundaryHit& hit, double d, double pad_half) {
  const double full = 2.0 * pad_half;
  if (d <= 0.0) return 0.0;
  if (shape.kind == ShapeKind::Circle) {
    const double dd = std::min(d, shape.radius);
    return std::min(full, 2.0 * std::sqrt(std::max(0.0, 2.0 * shape.radius * dd - dd * dd)));
  }
  if (hit.corner) return std::min(full, 2.0 * d);
  const double run = std::min(pad_half, hit.dist_to_prev_vertex) +
                     std::min(pad_half, hit.dist_to_next_vertex);
  return std::min(full, run);
}

// Compression that balances the grip command: stiffness * d * (extent/full)
// is nondecreasing in d, so bisect; the pad clamp caps the reachable force.
void solve_compression(const ObjectShape& shape, const BoundaryHit& hit,
                       const GripperGeometry& geom, double command, double* depth_out,
                       double* extent_out, double* force_out) {
  const double full = 2.0 * geom.pad_half_width;
  auto force_at = [&](double d) {
    return geom.contact_stiffness * d * (extent_at(shape, hit, d, geom.pad_half_width) / full);
  };
  double lo = 0.0, hi = geom.max_compression;
  if (command <= 0.0) {
    *depth_out = 0.0;
    *extent_out = 0.0;
    *force_out = 0.0;
    return;
  }
  if (force_at(hi) <= command) {
    *depth_out = hi;
  } else {
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (force_at(mid) < command ? lo : hi) = mid;
    }
    *depth_out = 0.5 * (lo + hi);
  }
  *extent_out = extent_at(shape, hit, *depth_out, geom.pad_half_width);
  *force_out = force_at(*depth_out);
}

}  // namespace

ContactSet resolve_contacts(const ObjectShape& object, const GripperConfiguration& config,
                            const GripperGeometry& geom) {
  object.validate();
  config.validate();
  geom.validate();
  ContactSet out;
  for (int i = 0; i < 3; ++i) {
    if (!config.fingers[i].active) continue;
    const ApproachRay ray = approach_ray(config, geom, i);
    const auto hit = first_hit(object, ray, geom.corner_tolerance);
    if (!hit) continue;
    FingerContact fc;
    solve_compression(object, *hit, geom, config.fingers[i].grip_command, &fc.patch.depth,
                      &fc.patch.extent, &fc.normal_force);
    fc.patch.point = hit->point;
    fc.patch.normal = hit->inward_normal;
    // A constant-curvature arc re-centers the conforming pad, so round
    // boundaries never bite the pad into a twist; faces and corners do.
    fc.twist = object.kind == ShapeKind::Circle
                   ? 0.0
                   : signed_angle(hit->inward_normal, ray.direction);
    out[i] = fc;
  }
  return out;
}

double local_contact_extent(const ObjectShape& shape, double arclength_fraction, double depth,
                            double pad_half) {
  shape.validate();
  if (arclength_fraction < 0.0 || arclength_fraction >= 1.0)
    throw std::invalid_argument("arclength fraction must lie in [0, 1)");
  if (depth < 0.0) throw std::invalid_argument("press depth must be nonnegative");
  BoundaryHit h;
  if (shape.kind == ShapeKind::Circle) {
    return extent_at(shape, h, depth, pad_half);
  }
  const auto verts = boundary_vertices(shape);
  double target = arclength_fraction * boundary_perimeter(shape);
  for (std::size_t i = 0; i < verts.size(); ++i) {
    const double len = (verts[(i + 1) % verts.size()] - verts[i]).norm();
    if (target <= len || i + 1 == verts.size()) {
      h.dist_to_prev_vertex = std::min(target, len);
      h.dist_to_next_vertex = len - h.dist_to_prev_vertex;
      break;
    }
    target -= len;
  }
  return extent_at(shape, h, depth, pad_half);
}

void PoseNoiseSpec::validate() const {
  if (translation_radius < 0.0 || rotation_range < 0.0 || !std::isfinite(translation_radius) ||
      !std::isfinite(rotation_range))
    throw std::invalid_argument("pose noise magnitudes must be nonnegative and finite");
}

ObjectShape perturb_pose(const ObjectShape& object, const PoseNoiseSpec& noise, Rng& rng) {
  object.validate();
  noise.validate();
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  // Fixed draw order: disc radius, disc angle, rotation.
  const double r = noise.translation_radius * std::sqrt(uni(rng));
  const double phi = kTwoPi * uni(rng);
  const double dtheta = noise.rotation_range * (2.0 * uni(rng) - 1.0);
  ObjectShape moved = object;
  moved.pose.position += r * unit_vector(phi);
  moved.pose.orientation = normalize_angle(moved.pose.orientation + dtheta);
  return moved;
}

}  // namespace softgrasp
