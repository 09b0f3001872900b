#pragma once

#include <array>
#include <cstdint>

#include "softgrasp/geometry.hpp"
#include "softgrasp/rng.hpp"
#include "softgrasp/scene.hpp"

namespace softgrasp {

inline constexpr int kFiberCount = 5;

// Per-fiber transmission losses in dB; all components finite and >= 0.
struct DeformationVector {
  std::array<double, kFiberCount> loss_db{};
};

struct ReactionWrench {
  double fx = 0.0, fy = 0.0, fz = 0.0;  // N; fx is the contact normal force
  double tx = 0.0, ty = 0.0, tz = 0.0;  // N*m; tz is the fingertip twisting torque
};

// Finger-frame load descriptor: what the soft pad actually carries.
// effective_depth folds the conformed patch extent into the compression so the
// reaction force stays proportional to it.
struct ContactLoad {
  double effective_depth = 0.0;   // m
  double centroid_offset = 0.0;   // signed tangential shift of the pressure centroid, m
  double twist = 0.0;             // rad
};

struct FingerModelParams {
  double curvature_gain_db = 40.0;     // dB per unit fiber curvature
  double saturation_db = 30.0;         // loss ceiling per fiber
  double noise_db = 0.15;              // additive Gaussian sigma on each fiber
  double normal_stiffness = 2000.0;    // N/m
  double tangential_stiffness = 800.0; // N/m
  double torsional_stiffness = 0.5;    // N*m/rad
  double pad_half_width = 0.008;       // m
  double sensitivity_jitter = 0.12;    // relative fabrication spread between fingers
  std::uint64_t sensor_seed = 7;
  void validate() const;
};

// Columns of the sensitivity matrix: (effective depth, offset+, offset-,
// twist+, twist-). Signed inputs are rectified into nonnegative pairs so
// curvatures never go negative and every fiber stays monotone in depth and
// |twist|.
struct FingerResponseModel {
  Eigen::Matrix<double, kFiberCount, 5> sensitivity;
  double curvature_gain_db = 40.0;
  double saturation_db = 30.0;
  double noise_db = 0.15;
  double normal_stiffness = 2000.0;
  double tangential_stiffness = 800.0;
  double torsional_stiffness = 0.5;
  double pad_half_width = 0.008;
  std::uint64_t seed = 0;
  void validate() const;
};

// Transmitted-intensity loss in dB. Domain: i0 > 0, 0 < i <= i0.
double flux_loss(double i0, double i);

// Builds finger `finger_index`'s model: the shared base sensitivity layout
// with a seeded per-finger fabrication jitter.
FingerResponseModel make_finger_model(const FingerModelParams& params, int finger_index);

// Patch -> load: effective depth scales by the conformed-extent fraction; the
// pressure centroid shifts sideways with oblique presses. Zero depth means no
// contact, so the whole load is zero.
ContactLoad load_from_patch(const FingerResponseModel& model, const ContactPatch& patch,
                            double twist);

std::array<double, kFiberCount> fiber_curvatures(const FingerResponseModel& model,
                                                 const ContactLoad& load);

// Noiseless loss per fiber is min(gain * curvature, saturation); noise_db > 0
// adds clamped Gaussian noise (5 draws per call, in fiber order).
DeformationVector sense(const FingerResponseModel& model, const ContactLoad& load, Rng& rng);
DeformationVector sense(const FingerResponseModel& model, const ContactPatch& patch, double twist,
                        Rng& rng);

// Planar reaction: fx = stiffness * effective depth, fy = tangential coupling
// from the centroid offset, tz = torsional stiffness * twist; fz/tx/ty zero.
ReactionWrench react(const FingerResponseModel& model, const ContactLoad& load);
ReactionWrench react(const FingerResponseModel& model, const ContactPatch& patch, double twist);

}  // namespace softgrasp
