#pragma once

// Shared test fixtures: a calibrated perception stack and a scratch directory
// helper.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "softgrasp/calibration.hpp"
#include "softgrasp/optimizer.hpp"
#include "softgrasp/rng.hpp"
#include "softgrasp/scene.hpp"

namespace helpers {

// Synthesizes finger models and fits their readouts, using the same seed
// streams as the calibrate pipeline step.
inline softgrasp::Perception make_perception(std::uint64_t seed, int samples = 1200,
                                             double noise_db = 0.15) {
  softgrasp::FingerModelParams fm;
  fm.noise_db = noise_db;
  const std::vector<softgrasp::ObjectShape> objects = {
      softgrasp::ObjectShape::circle(0.03), softgrasp::ObjectShape::square(0.04),
      softgrasp::ObjectShape::rectangle(0.08, 0.04), softgrasp::ObjectShape::triangle(0.05)};
  softgrasp::Perception p;
  for (int i = 0; i < 3; ++i) {
    p.response[i] = softgrasp::make_finger_model(fm, i);
    softgrasp::Rng rng = softgrasp::SeedMix(seed).mix("dataset").mix(i).rng();
    const auto data = softgrasp::generate_dataset(objects, samples, p.response[i], {}, rng);
    softgrasp::FitOptions fo;
    fo.split_seed = softgrasp::SeedMix(seed).mix("split").mix(i).value();
    p.readout[i] = softgrasp::fit(data, fo);
  }
  return p;
}

// Fresh empty directory under the system temp root; wiped on construction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    dir_ = std::filesystem::temp_directory_path() / ("softgrasp_test_" + tag);
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  const std::filesystem::path& path() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace helpers
