#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "softgrasp/calibration.hpp"
#include "softgrasp/rng.hpp"
#include "softgrasp/scene.hpp"
#include "helpers.hpp"

using namespace softgrasp;

namespace {

std::vector<ObjectShape> press_objects() {
  return {ObjectShape::circle(0.03), ObjectShape::square(0.04), ObjectShape::rectangle(0.08, 0.04),
          ObjectShape::triangle(0.05)};
}

std::vector<SensorSample> make_samples(int count, double noise_db, std::uint64_t seed,
                                       const PressSpec& press = {}) {
  FingerModelParams params;
  params.noise_db = noise_db;
  const FingerResponseModel model = make_finger_model(params, 0);
  Rng rng(seed);
  const auto objects = press_objects();
  return generate_dataset(objects, count, model, press, rng);
}

}  // namespace

TEST_CASE("rmse hand cases") {
  const std::vector<double> y{1.0, 2.0, 3.0};
  CHECK(rmse(y, y) == 0.0);
  CHECK(rmse(std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 1.0}) == 1.0);
  CHECK(std::abs(rmse(y, std::vector<double>{2.0, 2.0, 2.0}) - 0.8164965809) <= 1e-9);
  CHECK_THROWS_AS(rmse(y, std::vector<double>{1.0}), std::invalid_argument);
  CHECK_THROWS_AS(rmse(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("coefficient of determination hand cases") {
  const std::vector<double> y{1.0, 2.0, 3.0};
  CHECK(r_squared(y, y) == 1.0);
  CHECK(std::abs(r_squared(y, std::vector<double>{2.0, 2.0, 2.0})) <= 1e-15);
  CHECK(std::abs(r_squared(y, std::vector<double>{3.0, 2.0, 1.0}) - (-3.0)) <= 1e-12);
  CHECK_THROWS_AS(r_squared(std::vector<double>{2.0, 2.0}, std::vector<double>{1.0, 3.0}),
                  std::domain_error);
  CHECK_THROWS_AS(r_squared(y, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("classification success rate counts exact matches") {
  const std::vector<int> truth{1, 0, -1, 1};
  CHECK(classification_success_rate(truth, truth) == 1.0);
  CHECK(classification_success_rate(truth, std::vector<int>{-1, 1, 0, -1}) == 0.0);
  std::vector<int> labels(64, 1), preds(64, 1);
  preds[10] = -1;
  CHECK(classification_success_rate(labels, preds) == 0.984375);
  CHECK_THROWS_AS(classification_success_rate(truth, std::vector<int>{1}), std::invalid_argument);
}

TEST_CASE("rmse and r-squared satisfy their shared identity on random vectors") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> uni(-5.0, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int m = 16;
    std::vector<double> y(m), y_hat(m);
    for (int i = 0; i < m; ++i) {
      y[i] = uni(gen);
      y_hat[i] = uni(gen);
    }
    const double mean = [&] {
      double s = 0.0;
      for (double v : y) s += v;
      return s / m;
    }();
    double ss_tot = 0.0;
    for (double v : y) ss_tot += (v - mean) * (v - mean);
    const double e = rmse(y, y_hat);
    const double r2 = r_squared(y, y_hat);
    CHECK(std::abs(r2 - (1.0 - m * e * e / ss_tot)) <= 1e-9);
    CHECK(e >= 0.0);
  }
}

TEST_CASE("torque sign labels honor the dead band") {
  CHECK(sign_label(0.004, 0.005) == 0);
  CHECK(sign_label(-0.004, 0.005) == 0);
  CHECK(sign_label(0.005, 0.005) == 0);
  CHECK(sign_label(0.0051, 0.005) == 1);
  CHECK(sign_label(-0.006, 0.005) == -1);
}

TEST_CASE("dataset generation is deterministic under the seed") {
  const auto a = make_samples(200, 0.15, 42);
  const auto b = make_samples(200, 0.15, 42);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (int k = 0; k < kFiberCount; ++k)
      CHECK(a[i].deformation.loss_db[k] == b[i].deformation.loss_db[k]);
    CHECK(a[i].wrench.fx == b[i].wrench.fx);
    CHECK(a[i].wrench.tz == b[i].wrench.tz);
  }
}

TEST_CASE("forcing zero press depth yields all-zero samples") {
  PressSpec press;
  press.max_depth = 0.0;
  const auto samples = make_samples(20, 0.0, 7, press);
  REQUIRE(samples.size() == 20);
  for (const auto& s : samples) {
    for (double v : s.deformation.loss_db) CHECK(v == 0.0);
    CHECK(s.wrench.fx == 0.0);
    CHECK(s.wrench.fy == 0.0);
    CHECK(s.wrench.tz == 0.0);
  }
}

TEST_CASE("default presses balance the torque-sign classes") {
  const auto samples = make_samples(2000, 0.15, 11);
  int nonzero = 0;
  for (const auto& s : samples) nonzero += sign_label(s.wrench.tz, 0.005) != 0 ? 1 : 0;
  const double fraction = nonzero / 2000.0;
  CHECK(fraction >= 0.40);
  CHECK(fraction <= 0.60);
}

TEST_CASE("dataset generation rejects bad inputs") {
  FingerModelParams params;
  const FingerResponseModel model = make_finger_model(params, 0);
  Rng rng(1);
  CHECK_THROWS_AS(generate_dataset({}, 10, model, {}, rng), std::invalid_argument);
  const auto objects = press_objects();
  CHECK_THROWS_AS(generate_dataset(objects, -1, model, {}, rng), std::invalid_argument);
  PressSpec bad;
  bad.zero_twist_prob = 1.5;
  CHECK_THROWS_AS(generate_dataset(objects, 10, model, bad, rng), std::invalid_argument);
}

TEST_CASE("fit options validate their ranges") {
  FitOptions fo;
  fo.holdout_fraction = 0.0;
  CHECK_THROWS_AS(fo.validate(), std::invalid_argument);
  fo = {};
  fo.holdout_fraction = 1.0;
  CHECK_THROWS_AS(fo.validate(), std::invalid_argument);
  fo = {};
  fo.ridge_lambda = -1.0;
  CHECK_THROWS_AS(fo.validate(), std::invalid_argument);
  CHECK_THROWS_AS(fit(make_samples(8, 0.0, 3)), std::invalid_argument);
}

TEST_CASE("a noiseless dataset is recovered almost perfectly") {
  const auto samples = make_samples(2000, 0.0, 21);
  const CalibrationModel model = fit(samples);
  CHECK(model.metrics.fn_r2 >= 0.999);
  CHECK(model.metrics.tz_r2 >= 0.999);
  CHECK(model.metrics.sign_success >= 0.99);
  CHECK(model.train_count + model.test_count == samples.size());
}

TEST_CASE("doubling a noiseless dataset leaves the recovered map unchanged") {
  const auto samples = make_samples(400, 0.0, 31);
  auto doubled = samples;
  doubled.insert(doubled.end(), samples.begin(), samples.end());
  FitOptions fo;
  fo.ridge_lambda = 1e-12;
  const CalibrationModel a = fit(samples, fo);
  const CalibrationModel b = fit(doubled, fo);
  // the stored weights live in each fit's own normalized basis, so compare
  // the de-normalized map they define
  const auto raw = [](const CalibrationModel& m, const Eigen::VectorXd& w, double b0) {
    Eigen::VectorXd rw = w.array() / m.feature_scale.array();
    return std::make_pair(rw, b0 - rw.dot(m.feature_mean));
  };
  const auto [fa, ca] = raw(a, a.fn_weights, a.fn_intercept);
  const auto [fb, cb] = raw(b, b.fn_weights, b.fn_intercept);
  CHECK((fa - fb).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(std::abs(ca - cb) <= 1e-9);
  const auto [ta, da] = raw(a, a.tz_weights, a.tz_intercept);
  const auto [tb, db] = raw(b, b.tz_weights, b.tz_intercept);
  CHECK((ta - tb).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(std::abs(da - db) <= 1e-9);
  for (std::size_t i = 0; i < samples.size(); i += 37) {
    const Prediction pa = predict(a, samples[i].deformation);
    const Prediction pb = predict(b, samples[i].deformation);
    CHECK(std::abs(pa.normal_force - pb.normal_force) <= 1e-9);
  }
}

TEST_CASE("noiseless fits interpolate their own training samples") {
  const auto samples = make_samples(600, 0.0, 13);
  FitOptions fo;
  fo.ridge_lambda = 1e-12;
  const CalibrationModel model = fit(samples, fo);
  for (std::size_t i = 0; i < samples.size(); i += 50) {
    const Prediction p = predict(model, samples[i].deformation);
    CHECK(std::abs(p.normal_force - samples[i].wrench.fx) <= 1e-6);
    CHECK(p.torque_sign == sign_label(samples[i].wrench.tz, model.tau_z));
  }
  // the zero press maps back to zero force and a zero torque sign
  const Prediction origin = predict(model, DeformationVector{});
  CHECK(std::abs(origin.normal_force) <= 1e-6);
  CHECK(origin.torque_sign == 0);
}

TEST_CASE("prediction is a pure function of the stored weights") {
  const auto samples = make_samples(300, 0.15, 17);
  const CalibrationModel model = fit(samples);
  const Prediction a = predict(model, samples[5].deformation);
  const Prediction b = predict(model, samples[5].deformation);
  CHECK(a.normal_force == b.normal_force);
  CHECK(a.torque_sign == b.torque_sign);
}

TEST_CASE("a dataset of one repeated sample predicts the shared label") {
  auto one = make_samples(1, 0.15, 23);
  std::vector<SensorSample> repeated(30, one[0]);
  const CalibrationModel model = fit(repeated);
  const Prediction p = predict(model, one[0].deformation);
  CHECK(std::abs(p.normal_force - one[0].wrench.fx) <= 1e-12);
  CHECK(model.metrics.fn_r2 == 1.0);
}

TEST_CASE("noisy fits keep their held-out metrics in a sane range") {
  const auto samples = make_samples(2000, 0.15, 42);
  const CalibrationModel model = fit(samples);
  CHECK(model.metrics.fn_r2 >= 0.85);
  CHECK(model.metrics.fn_r2 <= 1.0);
  CHECK(model.metrics.sign_success >= 0.9);
  CHECK(model.metrics.fn_rmse >= 0.0);
}

TEST_CASE("datasets survive the CSV round trip") {
  helpers::TempDir dir("calib_csv");
  const auto samples = make_samples(50, 0.15, 29);
  const auto path = dir.path() / "dataset.csv";
  save_dataset_csv(path, samples);
  const auto loaded = load_dataset_csv(path);
  REQUIRE(loaded.size() == samples.size());
  const auto close_to = [](double a, double b) {
    return std::abs(a - b) <= 1e-12 + 1e-8 * std::abs(b);
  };
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (int k = 0; k < kFiberCount; ++k)
      CHECK(close_to(loaded[i].deformation.loss_db[k], samples[i].deformation.loss_db[k]));
    CHECK(close_to(loaded[i].wrench.fx, samples[i].wrench.fx));
    CHECK(close_to(loaded[i].wrench.tz, samples[i].wrench.tz));
  }
  CHECK_THROWS_AS(load_dataset_csv(dir.path() / "missing.csv"), std::runtime_error);
}

TEST_CASE("models survive the JSON round trip") {
  helpers::TempDir dir("calib_json");
  const auto samples = make_samples(300, 0.15, 37);
  const CalibrationModel model = fit(samples);
  const auto path = dir.path() / "model.json";
  save_model_json(path, model);
  const CalibrationModel loaded = load_model_json(path);
  CHECK((model.fn_weights - loaded.fn_weights).cwiseAbs().maxCoeff() == 0.0);
  CHECK((model.tz_weights - loaded.tz_weights).cwiseAbs().maxCoeff() == 0.0);
  CHECK(model.fn_intercept == loaded.fn_intercept);
  CHECK(model.tau_z == loaded.tau_z);
  CHECK(model.split_seed == loaded.split_seed);
  CHECK(model.metrics.sign_success == loaded.metrics.sign_success);
  for (std::size_t i = 0; i < samples.size(); i += 60) {
    const Prediction a = predict(model, samples[i].deformation);
    const Prediction b = predict(loaded, samples[i].deformation);
    CHECK(a.normal_force == b.normal_force);
    CHECK(a.torque_sign == b.torque_sign);
  }
  CHECK_THROWS_AS(load_model_json(dir.path() / "missing.json"), std::runtime_error);
}
