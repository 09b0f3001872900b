#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace softgrasp {

using Rng = std::mt19937_64;

// FNV-1a over a mix of tags. Derives independent, reproducible streams
// (per trial, per finger, per role) from one master seed.
class SeedMix {
 public:
  explicit SeedMix(std::uint64_t master) { mix_word(master); }

  SeedMix& mix(std::uint64_t v) {
    mix_word(v);
    return *this;
  }
  SeedMix& mix(int v) { return mix(static_cast<std::uint64_t>(v)); }
  SeedMix& mix(std::string_view s) {
    for (unsigned char c : s) step(c);
    step(0xffU);  // terminator, so ("ab","c") != ("a","bc")
    return *this;
  }

  std::uint64_t value() const { return h_; }
  Rng rng() const { return Rng(h_); }

 private:
  void mix_word(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      step(static_cast<unsigned char>(v & 0xffU));
      v >>= 8;
    }
  }
  void step(unsigned char c) { h_ = (h_ ^ c) * 0x100000001b3ULL; }

  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace softgrasp
