#pragma once

#include <utility>
#include <vector>

#include "softgrasp/geometry.hpp"

namespace softgrasp {

// One planar contact in a grasp: normal force along the inward normal, a
// signed tangential friction force along perp(normal), and the fingertip
// twisting torque.
struct ContactForce {
  int finger = 0;
  Vec2 point{0.0, 0.0};
  Vec2 normal{1.0, 0.0};       // inward unit normal
  double normal_force = 0.0;   // N, >= 0
  double tangential = 0.0;     // N, along perp(normal)
  double z_torque = 0.0;       // N*m
};

inline Vec2 tangential_vector(const ContactForce& c) { return c.tangential * perp(c.normal); }

struct GraspState {
  std::vector<ContactForce> contacts;
  Vec2 object_center{0.0, 0.0};
  double mu = 0.8;
  bool equilibrated = false;
  Vec2 residual_force{0.0, 0.0};
  double residual_torque = 0.0;
};

// Coulomb cone test: ||ft|| <= mu * fn. Throws on negative normal force or
// nonpositive mu.
bool friction_cone_check(double normal_force, const Vec2& tangential_force, double mu);

// Net force and net torque about the object center, including external load.
std::pair<Vec2, double> equilibrium_residual(const GraspState& state, const Vec2& external_force,
                                             double external_torque);

struct SqueezeContact {
  int finger = 0;
  Vec2 point{0.0, 0.0};
  Vec2 normal{1.0, 0.0};
  double normal_force = 0.0;
  double z_torque = 0.0;
};

// Holds the commanded normal forces fixed and finds tangential forces that
// close the quasi-static balance, constrained to the friction cones (global
// minimum of the residual over the box; exact active-set enumeration). When
// the best residual stays above tolerance the state is flagged
// non-equilibrated: the object would move.
GraspState squeeze_solve(const std::vector<SqueezeContact>& contacts, const Vec2& object_center,
                         double mu);

// Spare normal-force capacity against a pulling disturbance:
// mu * sum(fn) - ||sum(fn * n)||, clamped at zero. Demands an equilibrated
// state.
double anti_disturbance_margin(const GraspState& state);

// Margin for reporting: a grasp that never reached equilibrium resists
// nothing.
double margin_or_zero(const GraspState& state);

// Capacity against an external twisting load: tangential friction times lever
// arm, summed over contacts.
double torque_capacity(const GraspState& state);

}  // namespace softgrasp
