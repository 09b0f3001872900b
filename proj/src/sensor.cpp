#include "softgrasp/sensor.hpp"

#include <cmath>
#include <stdexcept>

namespace softgrasp {

void FingerModelParams::validate() const {
  if (!(curvature_gain_db > 0.0) || !(saturation_db > 0.0) || noise_db < 0.0 ||
      !(normal_stiffness > 0.0) || !(tangential_stiffness >= 0.0) || !(torsional_stiffness > 0.0) ||
      !(pad_half_width > 0.0) || sensitivity_jitter < 0.0 || sensitivity_jitter >= 1.0)
    throw std::invalid_argument("finger model parameters out of range");
}

void FingerResponseModel::validate() const {
  if (!(curvature_gain_db > 0.0) || !(saturation_db > 0.0) || noise_db < 0.0)
    throw std::invalid_argument("finger response constants out of range");
  if ((sensitivity.array() < 0.0).any())
    throw std::invalid_argument("sensitivity entries must be nonnegative");
}

double flux_loss(double i0, double i) {
  if (!(i0 > 0.0) || !(i > 0.0)) throw std::domain_error("intensities must be positive");
  if (i > i0) throw std::domain_error("transmitted intensity cannot exceed the input");
  return 10.0 * std::log10(i0 / i);
}

FingerResponseModel make_finger_model(const FingerModelParams& params, int finger_index) {
  params.validate();
  if (finger_index < 0 || finger_index > 2) throw std::invalid_argument("finger index out of range");
  // Shared layout: fibers 1-3 carry the compression/offset signal, fibers 4-5
  // the rectified twist pair (with a small depth coupling).
  static const double base[kFiberCount][5] = {
      {46.0, 8.0, 3.0, 0.0, 0.0},
      {38.0, 3.0, 8.0, 0.0, 0.0},
      {50.0, 5.0, 5.0, 0.0, 0.0},
      {6.0, 1.5, 0.5, 1.8, 0.0},
      {6.0, 0.5, 1.5, 0.0, 1.8},
  };
  FingerResponseModel m;
  m.curvature_gain_db = params.curvature_gain_db;
  m.saturation_db = params.saturation_db;
  m.noise_db = params.noise_db;
  m.normal_stiffness = params.normal_stiffness;
  m.tangential_stiffness = params.tangential_stiffness;
  m.torsional_stiffness = params.torsional_stiffness;
  m.pad_half_width = params.pad_half_width;
  m.seed = SeedMix(params.sensor_seed).mix("finger").mix(finger_index).value();
  Rng rng(m.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int r = 0; r < kFiberCount; ++r)
    for (int c = 0; c < 5; ++c)
      m.sensitivity(r, c) = base[r][c] * (1.0 + params.sensitivity_jitter * uni(rng));
  m.validate();
  return m;
}

ContactLoad load_from_patch(const FingerResponseModel& model, const ContactPatch& patch,
                            double twist) {
  if (patch.depth < 0.0) throw std::invalid_argument("contact depth must be nonnegative");
  ContactLoad load;
  if (patch.depth <= 0.0) return load;  // no contact, no load
  const double full = 2.0 * model.pad_half_width;
  load.effective_depth = patch.depth * std::min(1.0, patch.extent / full);
  const double bend = std::min(std::abs(twist), 1.2);
  load.centroid_offset = std::copysign(std::min(model.pad_half_width, patch.depth * std::tan(bend)),
                                       twist);
  load.twist = twist;
  return load;
}

std::array<double, kFiberCount> fiber_curvatures(const FingerResponseModel& model,
                                                 const ContactLoad& load) {
  if (load.effective_depth < 0.0) throw std::invalid_argument("effective depth must be nonnegative");
  Eigen::Matrix<double, 5, 1> c;
  c << load.effective_depth, std::max(load.centroid_offset, 0.0),
      std::max(-load.centroid_offset, 0.0), std::max(load.twist, 0.0), std::max(-load.twist, 0.0);
  const Eigen::Matrix<double, kFiberCount, 1> kappa = model.sensitivity * c;
  std::array<double, kFiberCount> out{};
  for (int i = 0; i < kFiberCount; ++i) out[i] = kappa(i);
  return out;
}

DeformationVector sense(const FingerResponseModel& model, const ContactLoad& load, Rng& rng) {
  const auto kappa = fiber_curvatures(model, load);
  DeformationVector d;
  for (int i = 0; i < kFiberCount; ++i)
    d.loss_db[i] = std::min(model.curvature_gain_db * kappa[i], model.saturation_db);
  if (model.noise_db > 0.0) {
    std::normal_distribution<double> gauss(0.0, model.noise_db);
    for (int i = 0; i < kFiberCount; ++i) d.loss_db[i] = std::max(0.0, d.loss_db[i] + gauss(rng));
  }
  return d;
}

DeformationVector sense(const FingerResponseModel& model, const ContactPatch& patch, double twist,
                        Rng& rng) {
  return sense(model, load_from_patch(model, patch, twist), rng);
}

ReactionWrench react(const FingerResponseModel& model, const ContactLoad& load) {
  if (load.effective_depth < 0.0) throw std::invalid_argument("effective depth must be nonnegative");
  ReactionWrench w;
  w.fx = model.normal_stiffness * load.effective_depth;
  w.fy = model.tangential_stiffness * load.centroid_offset;
  w.tz = model.torsional_stiffness * load.twist;
  return w;
}

ReactionWrench react(const FingerResponseModel& model, const ContactPatch& patch, double twist) {
  return react(model, load_from_patch(model, patch, twist));
}

}  // namespace softgrasp
