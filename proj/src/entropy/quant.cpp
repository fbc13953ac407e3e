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

#include "cgs/entropy/quant.hpp"

#include <cmath>

#include "cgs/common.hpp"

namespace cgs {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kLog2E = 1.4426950408889634074;  // 1/ln(2)
}  // namespace

int32_t Quantize(double x, double step) {
  Check(step > 0, "quantization step must be positive");
  double s = x / step;
  if (!(std::fabs(s) <= 2147483647.0)) Fail("quantization overflow");
  // Explicit round-half-to-even, independent of the FP rounding mode.
  double f = std::floor(s);
  double frac = s - f;
  double r;
  if (frac > 0.5) {
    r = f + 1.0;
  } else if (frac < 0.5) {
    r = f;
  } else {
    r = (std::fmod(f, 2.0) == 0.0) ? f : f + 1.0;
  }
  return static_cast<int32_t>(r);
}

double AddNoise(double x, double step, double u) {
  Check(step > 0, "quantization step must be positive");
  Check(u >= -0.5 && u < 0.5, "noise must lie in [-0.5, 0.5)");
  return x / step + u;
}

double RateBits(double p) {
  if (!(p > 0.0)) Fail("probability must be positive");
  return -std::log2(p);
}

double GaussianBinMass(double v, double tau, double rho, bool floored) {
  double z_hi = (v + 0.5 - tau) / rho;
  double z_lo = (v - 0.5 - tau) / rho;
  // Phi(z) = erfc(-z/sqrt(2)) / 2
  double mass =
      0.5 * (std::erfc(-z_hi * kInvSqrt2) - std::erfc(-z_lo * kInvSqrt2));
  if (floored && mass < kPmfFloor) mass = kPmfFloor;
  return mass;
}

Var GaussianBinMassTape(Var v, Var tau, Var rho) {
  Var z_hi = (v - tau + 0.5) / rho;
  Var z_lo = (v - tau - 0.5) / rho;
  Var mass = (erfc(z_hi * -kInvSqrt2) - erfc(z_lo * -kInvSqrt2)) * 0.5;
  return vmax(mass, kPmfFloor);
}

Var RateBitsTape(Var p) { return log(p) * -kLog2E; }

}  // namespace cgs
