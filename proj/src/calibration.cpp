#include "softgrasp/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace softgrasp {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string format_sig9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

Eigen::VectorXd features_of(const DeformationVector& d) {
  Eigen::VectorXd x(kFiberCount);
  for (int i = 0; i < kFiberCount; ++i) x(i) = d.loss_db[i];
  return x;
}

// Ridge on normalized features with the Gram matrix scaled per sample, so
// duplicating the dataset leaves the weights untouched.
struct RidgeFit {
  Eigen::VectorXd weights;
  double intercept = 0.0;
};

RidgeFit ridge_solve(const Eigen::MatrixXd& x_norm, const Eigen::VectorXd& y, double lambda) {
  const double m = static_cast<double>(x_norm.rows());
  const double y_mean = y.mean();
  const Eigen::VectorXd yc = y.array() - y_mean;
  Eigen::MatrixXd gram = (x_norm.transpose() * x_norm) / m;
  gram.diagonal().array() += lambda;
  const Eigen::VectorXd rhs = (x_norm.transpose() * yc) / m;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("calibration fit failed: singular features");
  RidgeFit fit;
  fit.weights = ldlt.solve(rhs);
  fit.intercept = y_mean;
  if (!fit.weights.allFinite()) throw std::runtime_error("calibration fit failed: non-finite solution");
  return fit;
}

}  // namespace

void PressSpec::validate() const {
  if (max_depth < 0.0 || max_twist < 0.0 || max_offset < 0.0 || zero_twist_prob < 0.0 ||
      zero_twist_prob > 1.0)
    throw std::invalid_argument("press bounds must be nonnegative (probability in [0,1])");
}

void FitOptions::validate() const {
  if (!(ridge_lambda >= 0.0) || !(tau_z >= 0.0))
    throw std::invalid_argument("fit options must be nonnegative");
  if (holdout_fraction <= 0.0 || holdout_fraction >= 1.0)
    throw std::invalid_argument("holdout fraction must lie in (0, 1)");
}

std::vector<SensorSample> generate_dataset(std::span<const ObjectShape> objects, int count,
                                           const FingerResponseModel& model,
                                           const PressSpec& press, Rng& rng) {
  press.validate();
  model.validate();
  if (objects.empty()) throw std::invalid_argument("dataset needs at least one object");
  if (count < 0) throw std::invalid_argument("sample count must be nonnegative");
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<SensorSample> out;
  out.reserve(static_cast<std::size_t>(count));
  const double full = 2.0 * model.pad_half_width;
  for (int s = 0; s < count; ++s) {
    // Fixed draw order per sample: object, boundary point, depth, twist gate,
    // twist value, offset. Noise draws follow inside sense().
    const auto obj_idx = static_cast<std::size_t>(uni(rng) * static_cast<double>(objects.size()));
    const ObjectShape& obj = objects[std::min(obj_idx, objects.size() - 1)];
    const double boundary_u = uni(rng);
    const double depth = press.max_depth * uni(rng);
    const bool straight = uni(rng) < press.zero_twist_prob;
    const double twist_draw = press.max_twist * (2.0 * uni(rng) - 1.0);
    const double offset_draw = press.max_offset * (2.0 * uni(rng) - 1.0);
    ContactLoad load;  // zero-depth presses stay a full-zero load
    if (depth > 0.0) {
      const double extent = local_contact_extent(obj, boundary_u, depth, model.pad_half_width);
      load.effective_depth = depth * std::min(1.0, extent / full);
      load.centroid_offset = offset_draw;
      load.twist = straight ? 0.0 : twist_draw;
    }
    SensorSample sample;
    sample.deformation = sense(model, load, rng);
    sample.wrench = react(model, load);
    out.push_back(sample);
  }
  return out;
}

void save_dataset_csv(const std::filesystem::path& path, const std::vector<SensorSample>& samples) {
  std::ostringstream body;
  body << "a1,a2,a3,a4,a5,Fx,Fy,Fz,Tx,Ty,Tz\n";
  for (const auto& s : samples) {
    for (int i = 0; i < kFiberCount; ++i) body << format_sig9(s.deformation.loss_db[i]) << ',';
    body << format_sig9(s.wrench.fx) << ',' << format_sig9(s.wrench.fy) << ','
         << format_sig9(s.wrench.fz) << ',' << format_sig9(s.wrench.tx) << ','
         << format_sig9(s.wrench.ty) << ',' << format_sig9(s.wrench.tz) << '\n';
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << body.str();
  }
  std::filesystem::rename(tmp, path);
}

std::vector<SensorSample> load_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty dataset file " + path.string());
  if (line != "a1,a2,a3,a4,a5,Fx,Fy,Fz,Tx,Ty,Tz")
    throw std::runtime_error("unexpected dataset header in " + path.string());
  std::vector<SensorSample> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    double vals[11];
    for (double& val : vals) {
      if (!std::getline(row, cell, ',')) throw std::runtime_error("short dataset row");
      val = std::stod(cell);
    }
    SensorSample s;
    for (int i = 0; i < kFiberCount; ++i) s.deformation.loss_db[i] = vals[i];
    s.wrench = {vals[5], vals[6], vals[7], vals[8], vals[9], vals[10]};
    out.push_back(s);
  }
  return out;
}

int sign_label(double tz, double tau_z) {
  if (tz > tau_z) return 1;
  if (tz < -tau_z) return -1;
  return 0;
}

double rmse(std::span<const double> truth, std::span<const double> predicted) {
  if (truth.size() != predicted.size() || truth.empty())
    throw std::invalid_argument("rmse needs two equal-length nonempty vectors");
  double acc = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = truth[i] - predicted[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(truth.size()));
}

double r_squared(std::span<const double> truth, std::span<const double> predicted) {
  if (truth.size() != predicted.size() || truth.empty())
    throw std::invalid_argument("r_squared needs two equal-length nonempty vectors");
  const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) /
                      static_cast<double>(truth.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ss_res += (truth[i] - predicted[i]) * (truth[i] - predicted[i]);
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  if (ss_tot <= 0.0) throw std::domain_error("r_squared undefined for constant truth");
  return 1.0 - ss_res / ss_tot;
}

double classification_success_rate(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size() || truth.empty())
    throw std::invalid_argument("success rate needs two equal-length nonempty vectors");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == predicted[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

CalibrationModel fit(const std::vector<SensorSample>& samples, const FitOptions& options) {
  options.validate();
  if (samples.size() < 10) throw std::invalid_argument("fit needs at least 10 samples");
  const auto n = samples.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(options.split_seed);
  std::shuffle(order.begin(), order.end(), shuffle_rng);
  const auto n_test = std::max<std::size_t>(1, static_cast<std::size_t>(
                          std::llround(options.holdout_fraction * static_cast<double>(n))));
  const auto n_train = n - n_test;
  if (n_train < 5) throw std::invalid_argument("fit needs at least 5 training samples");

  Eigen::MatrixXd x_train(n_train, kFiberCount), x_test(n_test, kFiberCount);
  Eigen::VectorXd fn_train(n_train), fn_test(n_test), tz_train(n_train), tz_test(n_test);
  for (std::size_t i = 0; i < n; ++i) {
    const SensorSample& s = samples[order[i]];
    if (i < n_train) {
      x_train.row(i) = features_of(s.deformation).transpose();
      fn_train(i) = s.wrench.fx;
      tz_train(i) = s.wrench.tz;
    } else {
      const auto j = i - n_train;
      x_test.row(j) = features_of(s.deformation).transpose();
      fn_test(j) = s.wrench.fx;
      tz_test(j) = s.wrench.tz;
    }
  }

  CalibrationModel model;
  model.tau_z = options.tau_z;
  model.ridge_lambda = options.ridge_lambda;
  model.split_seed = options.split_seed;
  model.train_count = n_train;
  model.test_count = n_test;
  model.feature_mean = x_train.colwise().mean();
  Eigen::VectorXd var = ((x_train.rowwise() - model.feature_mean.transpose()).array().square())
                            .colwise()
                            .mean();
  model.feature_scale = var.array().sqrt().max(1e-12);

  const Eigen::MatrixXd x_norm =
      (x_train.rowwise() - model.feature_mean.transpose()).array().rowwise() /
      model.feature_scale.transpose().array();

  const RidgeFit fn_fit = ridge_solve(x_norm, fn_train, options.ridge_lambda);
  model.fn_weights = fn_fit.weights;
  model.fn_intercept = fn_fit.intercept;
  const RidgeFit tz_fit = ridge_solve(x_norm, tz_train, options.ridge_lambda);
  model.tz_weights = tz_fit.weights;
  model.tz_intercept = tz_fit.intercept;

  std::vector<double> fn_truth(n_test), fn_pred(n_test), tz_truth(n_test), tz_pred(n_test);
  std::vector<int> sign_truth(n_test), sign_pred(n_test);
  for (std::size_t j = 0; j < n_test; ++j) {
    DeformationVector d;
    for (int k = 0; k < kFiberCount; ++k) d.loss_db[k] = x_test(j, k);
    const Prediction p = predict(model, d);
    const Eigen::VectorXd xn =
        (x_test.row(j).transpose() - model.feature_mean).array() / model.feature_scale.array();
    fn_truth[j] = fn_test(j);
    fn_pred[j] = p.normal_force;
    tz_truth[j] = tz_test(j);
    tz_pred[j] = model.tz_weights.dot(xn) + model.tz_intercept;
    sign_truth[j] = sign_label(tz_test(j), options.tau_z);
    sign_pred[j] = p.torque_sign;
  }
  // A degenerate holdout (constant truth) leaves R^2 undefined; score it by
  // whether the constant was reproduced instead of failing the whole fit.
  const auto holdout_r2 = [](const std::vector<double>& truth, const std::vector<double>& pred) {
    const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) /
                        static_cast<double>(truth.size());
    double ss_tot = 0.0;
    for (const double v : truth) ss_tot += (v - mean) * (v - mean);
    if (ss_tot > 0.0) return r_squared(truth, pred);
    return rmse(truth, pred) <= 1e-9 ? 1.0 : 0.0;
  };
  model.metrics.fn_rmse = rmse(fn_truth, fn_pred);
  model.metrics.fn_r2 = holdout_r2(fn_truth, fn_pred);
  model.metrics.tz_rmse = rmse(tz_truth, tz_pred);
  model.metrics.tz_r2 = holdout_r2(tz_truth, tz_pred);
  model.metrics.sign_success = classification_success_rate(sign_truth, sign_pred);
  return model;
}

Prediction predict(const CalibrationModel& model, const DeformationVector& deformation) {
  const Eigen::VectorXd xn =
      (features_of(deformation) - model.feature_mean).array() / model.feature_scale.array();
  Prediction p;
  p.normal_force = model.fn_weights.dot(xn) + model.fn_intercept;
  p.torque_sign = sign_label(model.tz_weights.dot(xn) + model.tz_intercept, model.tau_z);
  return p;
}

namespace {

ordered_json vec_to_json(const Eigen::VectorXd& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Eigen::VectorXd vec_from_json(const ordered_json& arr) {
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  return v;
}

}  // namespace

void save_model_json(const std::filesystem::path& path, const CalibrationModel& model) {
  ordered_json j;
  j["fn_weights"] = vec_to_json(model.fn_weights);
  j["fn_intercept"] = model.fn_intercept;
  j["tz_weights"] = vec_to_json(model.tz_weights);
  j["tz_intercept"] = model.tz_intercept;
  j["feature_mean"] = vec_to_json(model.feature_mean);
  j["feature_scale"] = vec_to_json(model.feature_scale);
  j["tau_z"] = model.tau_z;
  j["ridge_lambda"] = model.ridge_lambda;
  j["split_seed"] = model.split_seed;
  j["train_count"] = model.train_count;
  j["test_count"] = model.test_count;
  j["metrics"] = {{"fn_rmse", model.metrics.fn_rmse},
                  {"fn_r2", model.metrics.fn_r2},
                  {"tz_rmse", model.metrics.tz_rmse},
                  {"tz_r2", model.metrics.tz_r2},
                  {"sign_success", model.metrics.sign_success}};
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

CalibrationModel load_model_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  ordered_json j;
  in >> j;
  CalibrationModel m;
  m.fn_weights = vec_from_json(j.at("fn_weights"));
  m.fn_intercept = j.at("fn_intercept").get<double>();
  m.tz_weights = vec_from_json(j.at("tz_weights"));
  m.tz_intercept = j.at("tz_intercept").get<double>();
  m.feature_mean = vec_from_json(j.at("feature_mean"));
  m.feature_scale = vec_from_json(j.at("feature_scale"));
  m.tau_z = j.at("tau_z").get<double>();
  m.ridge_lambda = j.at("ridge_lambda").get<double>();
  m.split_seed = j.at("split_seed").get<std::uint64_t>();
  m.train_count = j.at("train_count").get<std::size_t>();
  m.test_count = j.at("test_count").get<std::size_t>();
  const auto& met = j.at("metrics");
  m.metrics.fn_rmse = met.at("fn_rmse").get<double>();
  m.metrics.fn_r2 = met.at("fn_r2").get<double>();
  m.metrics.tz_rmse = met.at("tz_rmse").get<double>();
  m.metrics.tz_r2 = met.at("tz_r2").get<double>();
  m.metrics.sign_success = met.at("sign_success").get<double>();
  return m;
}

}  // namespace softgrasp
