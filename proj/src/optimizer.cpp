#include "softgrasp/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace softgrasp {

namespace {

constexpr double kAntipodalDot = -0.985;   // ~170 degrees apart
constexpr double kSameSideDot = 0.985;     // two fingers on one face
constexpr double kConcurrencySpread = 0.006;  // m, normal-line meeting scatter
constexpr double kElongationRatio = 1.25;     // cross extent vs pair width

struct EngagedContact {
  int finger;
  const FingerContact* contact;
};

std::vector<EngagedContact> engaged(const ContactSet& contacts) {
  std::vector<EngagedContact> out;
  for (int i = 0; i < 3; ++i)
    if (contacts[i]) out.push_back({i, &*contacts[i]});
  return out;
}

}  // namespace

std::map<std::string, BaseMode> OptimizationParams::default_preferences() {
  return {
      {"round", BaseMode::Circular},   {"circle", BaseMode::Circular},
      {"ball", BaseMode::Circular},    {"unknown", BaseMode::Circular},
      {"cylinder", BaseMode::Parallel}, {"rectangle", BaseMode::Parallel},
      {"cuboid", BaseMode::Parallel},  {"square", BaseMode::Lateral},
      {"cube", BaseMode::Lateral},
  };
}

void OptimizationParams::validate() const {
  if (!(torque_tolerance > 0.0) || !(force_tolerance > 0.0) || !(initial_step > 0.0))
    throw std::invalid_argument("optimization tolerances and step must be positive");
  if (max_torque_iterations < 1 || max_friction_iterations < 1)
    throw std::invalid_argument("iteration caps must be at least 1");
  if (!(min_grip_force >= 0.0) || !(grip_total > 0.0))
    throw std::invalid_argument("grip forces must be nonnegative with a positive total");
  if (grip_total < 2.0 * min_grip_force)
    throw std::invalid_argument("total grip cannot honor the per-finger floor");
}

std::string to_string(ShapeClass c) {
  switch (c) {
    case ShapeClass::Round: return "round";
    case ShapeClass::Square: return "square";
    case ShapeClass::Rectangle: return "rectangle";
    case ShapeClass::Unknown: break;
  }
  return "unknown";
}

TactileSummary classify_contacts(const ContactSet& contacts) {
  TactileSummary summary;
  const auto on = engaged(contacts);
  if (on.size() < 2) return summary;

  // Antipodal face pair: the signature of a flat-sided object.
  int pi = -1, pj = -1;
  double best_dot = 1.0;
  for (std::size_t a = 0; a < on.size(); ++a)
    for (std::size_t b = a + 1; b < on.size(); ++b) {
      const double d = on[a].contact->patch.normal.dot(on[b].contact->patch.normal);
      if (d < best_dot) {
        best_dot = d;
        pi = static_cast<int>(a);
        pj = static_cast<int>(b);
      }
    }
  if (best_dot <= kAntipodalDot) {
    const Vec2 axis_n = on[pi].contact->patch.normal;
    summary.pair_axis = normalize_angle(std::atan2(axis_n.y(), axis_n.x()));
    summary.pair_width =
        std::abs((on[pj].contact->patch.point - on[pi].contact->patch.point).dot(axis_n));
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& e : on) {
      const double s = e.contact->patch.point.dot(perp(axis_n));
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    summary.cross_extent = hi - lo;
    bool same_side_pair = false;
    for (std::size_t a = 0; a < on.size(); ++a)
      for (std::size_t b = a + 1; b < on.size(); ++b)
        same_side_pair |=
            on[a].contact->patch.normal.dot(on[b].contact->patch.normal) >= kSameSideDot;
    // An elongated section either parks two fingers on the same long face or
    // spreads the contacts well past the pair separation.
    summary.shape_class = (same_side_pair || summary.cross_extent >= kElongationRatio * summary.pair_width)
                              ? ShapeClass::Rectangle
                              : ShapeClass::Square;
    return summary;
  }

  // No face pair: normals meeting in one point read as a round section.
  std::vector<Vec2> meets;
  for (std::size_t a = 0; a < on.size(); ++a)
    for (std::size_t b = a + 1; b < on.size(); ++b) {
      const Vec2 na = on[a].contact->patch.normal, nb = on[b].contact->patch.normal;
      const double denom = cross2(na, nb);
      if (std::abs(denom) < 0.05) continue;
      const Vec2 dp = on[b].contact->patch.point - on[a].contact->patch.point;
      const double s = cross2(dp, nb) / denom;
      meets.push_back(on[a].contact->patch.point + s * na);
    }
  if (meets.empty()) return summary;
  double spread = 0.0;
  for (std::size_t a = 0; a < meets.size(); ++a)
    for (std::size_t b = a + 1; b < meets.size(); ++b)
      spread = std::max(spread, (meets[a] - meets[b]).norm());
  summary.shape_class = spread <= kConcurrencySpread ? ShapeClass::Round : ShapeClass::Unknown;
  return summary;
}

BaseMode select_base_configuration(const std::string& shape_class,
                                   const std::map<std::string, BaseMode>& preferences) {
  const auto it = preferences.find(shape_class);
  return it == preferences.end() ? BaseMode::Circular : it->second;
}

Prediction Perception::read(int finger, const ContactPatch& patch, double twist, Rng& rng) const {
  if (finger < 0 || finger > 2) throw std::invalid_argument("finger index out of range");
  const DeformationVector d = sense(response[finger], patch, twist, rng);
  return predict(readout[finger], d);
}

GraspState make_grasp_state(const ObjectShape& object, const ContactSet& contacts,
                            const std::array<FingerResponseModel, 3>& response, double mu) {
  std::vector<SqueezeContact> sq;
  for (int i = 0; i < 3; ++i) {
    if (!contacts[i]) continue;
    const FingerContact& c = *contacts[i];
    SqueezeContact s;
    s.finger = i;
    s.point = c.patch.point;
    s.normal = c.patch.normal;
    s.normal_force = c.normal_force;
    s.z_torque = react(response[i], c.patch, c.twist).tz;
    sq.push_back(s);
  }
  if (sq.size() < 2) {
    // Not a grasp; report the raw loads without pretending to balance them.
    GraspState state;
    state.object_center = object.pose.position;
    state.mu = mu;
    for (const auto& s : sq) {
      ContactForce f;
      f.finger = s.finger;
      f.point = s.point;
      f.normal = s.normal;
      f.normal_force = s.normal_force;
      f.z_torque = s.z_torque;
      state.contacts.push_back(f);
    }
    const auto [rf, rt] = equilibrium_residual(state, Vec2::Zero(), 0.0);
    state.residual_force = rf;
    state.residual_torque = rt;
    state.equilibrated = false;
    return state;
  }
  return squeeze_solve(sq, object.pose.position, mu);
}

TorqueResult torque_optimize(const ObjectShape& object, GripperConfiguration config,
                             const Perception& perception, const OptimizationParams& params,
                             const GripperGeometry& geom, Rng& rng) {
  params.validate();
  config.validate();
  TorqueResult result;
  std::array<double, 3> step{params.initial_step, params.initial_step, params.initial_step};
  std::array<int, 3> prev_sign{0, 0, 0};
  int trims = 0;
  for (;;) {
    const ContactSet contacts = resolve_contacts(object, config, geom);
    std::array<int, 3> sign{0, 0, 0};
    for (int i = 0; i < 3; ++i)
      if (config.fingers[i].active && contacts[i])
        sign[i] = perception.read(i, contacts[i]->patch, contacts[i]->twist, rng).torque_sign;
    if (sign[0] == 0 && sign[1] == 0 && sign[2] == 0) {
      result.converged = true;
      break;
    }
    if (trims >= params.max_torque_iterations) break;
    for (int i = 0; i < 3; ++i) {
      if (sign[i] == 0) continue;
      if (prev_sign[i] != 0 && sign[i] == -prev_sign[i]) step[i] *= 0.5;
      config.fingers[i].proximal = normalize_angle(config.fingers[i].proximal - sign[i] * step[i]);
      prev_sign[i] = sign[i];
    }
    ++trims;
  }
  result.iterations = trims;
  result.config = config;
  return result;
}

FrictionResult friction_optimize(const GraspState& state, const GripperConfiguration& config,
                                 const OptimizationParams& params) {
  params.validate();
  (void)config;
  FrictionResult result;
  const int m = static_cast<int>(state.contacts.size());
  if (m == 0) return result;

  const double total = params.grip_total;
  const double floor = params.min_grip_force;
  Eigen::MatrixXd normals(2, m);
  for (int i = 0; i < m; ++i) normals.col(i) = state.contacts[i].normal;

  Eigen::VectorXd best = Eigen::VectorXd::Constant(m, total / m);
  double best_obj = std::numeric_limits<double>::infinity();
  bool found = false;
  // Active-set sweep: each contact either rides the force floor or stays free;
  // free magnitudes solve the equality-constrained least squares exactly.
  for (int mask = 0; mask < (1 << m); ++mask) {
    std::vector<int> free_idx;
    double pinned_total = 0.0;
    Vec2 pinned_load = Vec2::Zero();
    for (int i = 0; i < m; ++i) {
      if (mask & (1 << i)) {
        pinned_total += floor;
        pinned_load += floor * state.contacts[i].normal;
      } else {
        free_idx.push_back(i);
      }
    }
    const double budget = total - pinned_total;
    Eigen::VectorXd x = Eigen::VectorXd::Constant(m, floor);
    if (free_idx.empty()) {
      if (std::abs(budget) > 1e-9) continue;
    } else {
      if (budget < -1e-12) continue;
      const int f = static_cast<int>(free_idx.size());
      Eigen::MatrixXd a(2, f);
      for (int k = 0; k < f; ++k) a.col(k) = normals.col(free_idx[k]);
      // min ||a*x + pinned_load|| subject to sum(x) = budget: substitute
      // x = equal split + null-space step, then solve the free least squares.
      // The min-norm step breaks degenerate ties toward the equal split.
      Eigen::VectorXd sol = Eigen::VectorXd::Constant(f, budget / f);
      if (f > 1) {
        const Eigen::MatrixXd q =
            Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd::Ones(f, 1)).householderQ();
        const Eigen::MatrixXd z = q.rightCols(f - 1);
        const Eigen::VectorXd y = (a * z).completeOrthogonalDecomposition().solve(
            -(a * sol + pinned_load));
        sol += z * y;
      }
      bool ok = sol.allFinite();
      for (int k = 0; ok && k < f; ++k) ok = sol(k) >= floor - 1e-9;
      if (!ok) continue;
      for (int k = 0; k < f; ++k) x(free_idx[k]) = sol(k);
    }
    const double obj = (normals * x).norm();
    if (obj < best_obj - 1e-12) {
      best_obj = obj;
      best = x;
      found = true;
    }
  }

  std::vector<SqueezeContact> sq(m);
  for (int i = 0; i < m; ++i) {
    sq[i].finger = state.contacts[i].finger;
    sq[i].point = state.contacts[i].point;
    sq[i].normal = state.contacts[i].normal;
    sq[i].normal_force = best(i);
    sq[i].z_torque = state.contacts[i].z_torque;
    result.magnitudes[state.contacts[i].finger] = best(i);
  }
  result.state = m >= 2 ? squeeze_solve(sq, state.object_center, state.mu) : state;
  result.iterations = 1;
  result.balanced = found && best_obj <= params.force_tolerance;
  return result;
}

GripperConfiguration release_finger_if_needed(const ObjectShape& object,
                                              const GripperConfiguration& config,
                                              const GripperGeometry& geom) {
  if (config.mode != BaseMode::Lateral || !config.fingers[0].active) return config;
  const ContactSet contacts = resolve_contacts(object, config, geom);
  if (!contacts[1] || !contacts[2]) return config;
  if (contacts[1]->patch.normal.dot(contacts[2]->patch.normal) > kAntipodalDot) return config;
  // The symmetric pair holds the object on its own; the mid-plane finger is
  // redundant and its share moves to the pair.
  GripperConfiguration out = config;
  const double total = out.fingers[0].grip_command + out.fingers[1].grip_command +
                       out.fingers[2].grip_command;
  out.fingers[0].active = false;
  out.fingers[0].grip_command = 0.0;
  out.fingers[1].grip_command = total / 2.0;
  out.fingers[2].grip_command = total / 2.0;
  return out;
}

namespace {

std::array<FingerReading, 3> read_all(const ContactSet& contacts, const Perception& perception,
                                      Rng& rng) {
  std::array<FingerReading, 3> readings;
  for (int i = 0; i < 3; ++i) {
    if (!contacts[i]) continue;
    const Prediction p = perception.read(i, contacts[i]->patch, contacts[i]->twist, rng);
    readings[i].in_contact = true;
    readings[i].predicted_force = p.normal_force;
    readings[i].predicted_sign = p.torque_sign;
  }
  return readings;
}

int engaged_count(const ContactSet& contacts) {
  int n = 0;
  for (const auto& c : contacts) n += c ? 1 : 0;
  return n;
}

}  // namespace

OptimizedGrasp interactive_grasp(const ObjectShape& object, const GripperGeometry& geom,
                                 const OptimizationParams& params, const Perception& perception,
                                 Rng& rng, const std::string& class_hint,
                                 const std::optional<GripperConfiguration>& start) {
  object.validate();
  geom.validate();
  params.validate();
  OptimizedGrasp out;
  out.policy = "interactive";
  const auto& preferences =
      params.preferences.empty() ? OptimizationParams::default_preferences() : params.preferences;

  GripperConfiguration initial =
      start.value_or(GripperConfiguration::circular(deg2rad(90.0), params.grip_total / 3.0));
  out.initial_config = initial;

  const ContactSet first = resolve_contacts(object, initial, geom);
  out.initial_state = make_grasp_state(object, first, perception.response, geom.friction_mu);
  out.margin_before = margin_or_zero(out.initial_state);
  out.initial_readings = read_all(first, perception, rng);
  out.summary = classify_contacts(first);
  out.shape_class_used = class_hint.empty() ? to_string(out.summary.shape_class) : class_hint;

  if (engaged_count(first) < 2) {
    out.grasp_failed = true;
    out.final_config = initial;
    out.final_state = out.initial_state;
    out.margin_after = 0.0;
    return out;
  }

  const BaseMode mode = select_base_configuration(out.shape_class_used, preferences);
  const bool have_pair = out.summary.pair_width > 0.0;
  GripperConfiguration work;
  if (mode == initial.mode) {
    // A converged layout re-enters as its own base configuration; rebuilding
    // from the factory would throw away the aligned joints.
    work = initial;
  } else {
    const double per = params.grip_total / 3.0;
    switch (mode) {
      case BaseMode::Circular:
        work = GripperConfiguration::circular(initial.mode_axis, per);
        break;
      case BaseMode::Lateral:
        work = GripperConfiguration::lateral(
            have_pair ? normalize_angle(out.summary.pair_axis + kPi / 2.0) : initial.mode_axis,
            per);
        break;
      case BaseMode::Parallel:
        work = GripperConfiguration::parallel(
            have_pair ? out.summary.pair_axis : initial.mode_axis, per, geom);
        break;
    }
  }

  const TorqueResult torque = torque_optimize(object, work, perception, params, geom, rng);
  out.torque_iterations = torque.iterations;
  out.torque_converged = torque.converged;
  work = torque.config;

  work = release_finger_if_needed(object, work, geom);

  const ContactSet aligned = resolve_contacts(object, work, geom);
  if (engaged_count(aligned) < 2) {
    out.grasp_failed = true;
    out.final_config = work;
    out.final_state = make_grasp_state(object, aligned, perception.response, geom.friction_mu);
    out.margin_after = 0.0;
    return out;
  }
  const GraspState pre_friction =
      make_grasp_state(object, aligned, perception.response, geom.friction_mu);

  const FrictionResult friction = friction_optimize(pre_friction, work, params);
  out.friction_iterations = friction.iterations;
  out.friction_balanced = friction.balanced;
  for (int i = 0; i < 3; ++i)
    if (work.fingers[i].active && aligned[i]) work.fingers[i].grip_command = friction.magnitudes[i];

  const ContactSet final_contacts = resolve_contacts(object, work, geom);
  out.final_config = work;
  out.final_state = make_grasp_state(object, final_contacts, perception.response, geom.friction_mu);
  out.margin_after = margin_or_zero(out.final_state);
  out.grasp_failed = engaged_count(final_contacts) < 2;

  // Never hand back less than the starting grasp: when the walk landed in a
  // worse layout (e.g. two fingers drained onto one face), hold the initial
  // squeeze instead.
  if (!out.grasp_failed && out.margin_after < out.margin_before) {
    out.final_config = initial;
    out.final_state = out.initial_state;
    out.margin_after = out.margin_before;
  }
  return out;
}

OptimizedGrasp conventional_grasp(const ObjectShape& object, const GripperGeometry& geom,
                                  const OptimizationParams& params,
                                  const std::array<FingerResponseModel, 3>& response,
                                  double axis) {
  object.validate();
  geom.validate();
  params.validate();
  OptimizedGrasp out;
  out.policy = "conventional";
  const GripperConfiguration config =
      GripperConfiguration::circular(axis, params.grip_total / 3.0);
  out.initial_config = config;
  out.final_config = config;
  const ContactSet contacts = resolve_contacts(object, config, geom);
  out.initial_state = make_grasp_state(object, contacts, response, geom.friction_mu);
  out.final_state = out.initial_state;
  out.margin_before = margin_or_zero(out.initial_state);
  out.margin_after = out.margin_before;
  for (int i = 0; i < 3; ++i) out.initial_readings[i].in_contact = contacts[i].has_value();
  out.shape_class_used = "none";
  out.grasp_failed = engaged_count(contacts) < 2;
  return out;
}

}  // namespace softgrasp
