#include "softgrasp/mechanics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace softgrasp {

namespace {

constexpr double kResidualTol = 1e-9;

void check_state(const GraspState& state) {
  if (!(state.mu > 0.0)) throw std::invalid_argument("friction coefficient must be positive");
  for (const auto& c : state.contacts) {
    if (c.normal_force < 0.0) throw std::domain_error("normal forces must be nonnegative");
    if (std::abs(c.normal.norm() - 1.0) > 1e-9)
      throw std::invalid_argument("contact normals must be unit length");
  }
}

}  // namespace

bool friction_cone_check(double normal_force, const Vec2& tangential_force, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("friction coefficient must be positive");
  if (normal_force < 0.0) throw std::domain_error("normal force must be nonnegative");
  return tangential_force.norm() <= mu * normal_force;
}

std::pair<Vec2, double> equilibrium_residual(const GraspState& state, const Vec2& external_force,
                                             double external_torque) {
  check_state(state);
  Vec2 force = external_force;
  double torque = external_torque;
  for (const auto& c : state.contacts) {
    const Vec2 f = c.normal_force * c.normal + tangential_vector(c);
    force += f;
    torque += c.z_torque + cross2(c.point - state.object_center, f);
  }
  return {force, torque};
}

GraspState squeeze_solve(const std::vector<SqueezeContact>& contacts, const Vec2& object_center,
                         double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("friction coefficient must be positive");
  if (contacts.size() < 2) throw std::invalid_argument("squeeze needs at least two contacts");
  const int m = static_cast<int>(contacts.size());
  for (const auto& c : contacts)
    if (c.normal_force < 0.0) throw std::domain_error("commanded normal forces must be nonnegative");

  // Unknown tangentials t, one per contact, along perp(normal):
  //   [sum of tangential directions; their torque arms] * t = -(normal load).
  Eigen::MatrixXd a(3, m);
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  for (int i = 0; i < m; ++i) {
    const Vec2 dir = perp(contacts[i].normal);
    const Vec2 arm = contacts[i].point - object_center;
    a(0, i) = dir.x();
    a(1, i) = dir.y();
    a(2, i) = cross2(arm, dir);
    b(0) -= contacts[i].normal_force * contacts[i].normal.x();
    b(1) -= contacts[i].normal_force * contacts[i].normal.y();
    b(2) -= contacts[i].z_torque + cross2(arm, contacts[i].normal_force * contacts[i].normal);
  }

  // Global box-constrained least squares by active-set enumeration: each
  // tangential is free, pinned at +mu*fn, or pinned at -mu*fn. Tiny m makes
  // the 3^m sweep exact and deterministic.
  Eigen::VectorXd best_t = Eigen::VectorXd::Zero(m);
  double best_res = std::numeric_limits<double>::infinity();
  double best_norm = std::numeric_limits<double>::infinity();
  const int combos = static_cast<int>(std::pow(3, m));
  for (int code = 0; code < combos; ++code) {
    Eigen::VectorXd t(m);
    std::vector<int> free_idx;
    int c = code;
    bool valid = true;
    for (int i = 0; i < m; ++i, c /= 3) {
      const int st = c % 3;
      const double cap = mu * contacts[i].normal_force;
      if (st == 0) {
        free_idx.push_back(i);
        t(i) = 0.0;
      } else {
        t(i) = st == 1 ? cap : -cap;
      }
    }
    if (!free_idx.empty()) {
      Eigen::MatrixXd af(3, free_idx.size());
      Eigen::Vector3d bf = b;
      for (int i = 0; i < m; ++i) bf -= a.col(i) * t(i);  // free entries hold zero here
      for (std::size_t k = 0; k < free_idx.size(); ++k) af.col(k) = a.col(free_idx[k]);
      const Eigen::VectorXd tf =
          af.completeOrthogonalDecomposition().solve(bf);  // min-norm least squares
      for (std::size_t k = 0; k < free_idx.size(); ++k) {
        const int i = free_idx[k];
        const double cap = mu * contacts[i].normal_force;
        if (std::abs(tf(k)) > cap + 1e-12) {
          valid = false;
          break;
        }
        t(i) = tf(k);
      }
    }
    if (!valid) continue;
    const double res = (a * t - b).norm();
    const double tn = t.norm();
    if (res < best_res - 1e-15 || (res <= best_res + 1e-15 && tn < best_norm)) {
      best_res = res;
      best_norm = tn;
      best_t = t;
    }
  }

  GraspState state;
  state.object_center = object_center;
  state.mu = mu;
  state.contacts.reserve(contacts.size());
  for (int i = 0; i < m; ++i) {
    ContactForce cf;
    cf.finger = contacts[i].finger;
    cf.point = contacts[i].point;
    cf.normal = contacts[i].normal;
    cf.normal_force = contacts[i].normal_force;
    cf.tangential = best_t(i);
    cf.z_torque = contacts[i].z_torque;
    state.contacts.push_back(cf);
  }
  const auto [rf, rt] = equilibrium_residual(state, Vec2::Zero(), 0.0);
  state.residual_force = rf;
  state.residual_torque = rt;
  state.equilibrated = rf.norm() <= kResidualTol && std::abs(rt) <= kResidualTol;
  return state;
}

double anti_disturbance_margin(const GraspState& state) {
  check_state(state);
  if (!state.equilibrated)
    throw std::domain_error("anti-disturbance margin demands an equilibrated grasp");
  double total = 0.0;
  Vec2 net = Vec2::Zero();
  for (const auto& c : state.contacts) {
    total += c.normal_force;
    net += c.normal_force * c.normal;
  }
  return std::max(0.0, state.mu * total - net.norm());
}

double margin_or_zero(const GraspState& state) {
  return state.equilibrated ? anti_disturbance_margin(state) : 0.0;
}

double torque_capacity(const GraspState& state) {
  check_state(state);
  double cap = 0.0;
  for (const auto& c : state.contacts)
    cap += state.mu * c.normal_force * (c.point - state.object_center).norm();
  return cap;
}

}  // namespace softgrasp
