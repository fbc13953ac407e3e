// Copyright 2026 The CGS Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cgs {

// Thrown for all recoverable codec/scene errors; messages are stable and
// tested against.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

[[noreturn]] inline void Fail(const std::string& msg) { throw Error(msg); }

inline void Check(bool cond, const char* msg) {
  if (!cond) Fail(msg);
}

// splitmix64, the usual seeding/stateless hash PRNG.
inline uint64_t SplitMix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline double UnitDouble(uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Small sequential PRNG with deterministic, platform-independent output.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t NextU64() {
    state_ += 0x9E3779B97F4A7C15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double NextDouble() { return UnitDouble(NextU64()); }

  // Uniform in [lo, hi).
  double NextUniform(double lo, double hi) {
    return lo + (hi - lo) * NextDouble();
  }

  uint32_t NextBelow(uint32_t n) {
    return static_cast<uint32_t>(NextU64() % n);
  }

  // Box-Muller; avoids std::normal_distribution for cross-library
  // reproducibility.
  double NextNormal(double mean = 0.0, double stddev = 1.0) {
    if (have_spare_) {
      have_spare_ = false;
      return mean + stddev * spare_;
    }
    double u1 = NextDouble();
    double u2 = NextDouble();
    while (u1 <= 1e-300) u1 = NextDouble();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return mean + stddev * r * std::cos(a);
  }

 private:
  uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Stateless noise stream: a fixed (seed, step, tag, index) tuple always maps
// to the same uniform draw in [-0.5, 0.5). Keeps training noise reproducible
// under re-evaluation of the same step (finite-difference probes included).
inline double QuantNoise(uint64_t seed, uint64_t step, uint32_t tag,
                         uint64_t index) {
  uint64_t h = SplitMix64(seed ^ SplitMix64(step ^ 0x5851F42D4C957F2Dull));
  h = SplitMix64(h ^ (static_cast<uint64_t>(tag) << 32) ^ index);
  return UnitDouble(h) - 0.5;
}

}  // namespace cgs
