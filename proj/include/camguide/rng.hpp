/* Copyright 2026 The CamGuide Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef CAMGUIDE_RNG_HPP_
#define CAMGUIDE_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace camguide {

// SplitMix64-based generator. std::mt19937_64 itself is portable but the
// standard distributions are implementation-defined, and training resume
// needs streams that can be re-derived from (seed, step) without carrying
// state across checkpoints. Hand-rolling the whole thing keeps every byte
// of output reproducible across compilers and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) {
    // Rejection sampling on the top bits keeps the draw unbiased.
    std::uint64_t limit = ~0ULL - (~0ULL % n);
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    cached_ = r * std::sin(6.283185307179586476925286766559 * u2);
    have_cached_ = true;
    return r * std::cos(6.283185307179586476925286766559 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

// Derives an independent stream from a seed and a list of tags (e.g. the
// step index and a purpose id). Stateless: the same inputs always yield
// the same stream, which is what makes checkpoint-resume bit-exact.
inline Rng derive_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  Rng mixer(seed);
  std::uint64_t acc = mixer.next_u64();
  for (std::uint64_t t : tags) {
    Rng stage(acc ^ (t + 0x632be59bd9b4e019ULL));
    acc = stage.next_u64();
  }
  return Rng(acc);
}

// A single derived value, handy for seeding sub-generators per step.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return derive_rng(seed, {a, b}).next_u64();
}

// Stable stream ids used throughout training so call sites cannot collide.
namespace stream {
constexpr std::uint64_t kBatchOrder = 1;
constexpr std::uint64_t kFovmixPair = 2;
constexpr std::uint64_t kFovmixYaw = 3;
constexpr std::uint64_t kInit = 4;
constexpr std::uint64_t kGuideOrder = 5;
constexpr std::uint64_t kStudentInit = 6;
constexpr std::uint64_t kStudentMix = 7;
constexpr std::uint64_t kGenTrain = 8;
constexpr std::uint64_t kGenVal = 9;
constexpr std::uint64_t kGenSource = 10;
constexpr std::uint64_t kScribble = 11;
}  // namespace stream

}  // namespace camguide

#endif  // CAMGUIDE_RNG_HPP_
