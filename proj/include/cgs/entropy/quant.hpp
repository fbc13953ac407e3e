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

#include <cstdint>

#include "cgs/autodiff/tape.hpp"

namespace cgs {

// Minimum probability assigned to any coded symbol; matches the coder's
// 16-bit frequency resolution.
inline constexpr double kPmfFloor = 1.0 / 65536.0;

// Round-half-to-even of x/step. Errors out when the scaled value leaves the
// int32 range.
int32_t Quantize(double x, double step);

inline double Dequantize(int32_t v, double step) { return v * step; }

// Differentiable training surrogate for Quantize: x/step plus uniform noise
// u in [-0.5, 0.5).
double AddNoise(double x, double step, double u);

// Information content in bits.
double RateBits(double p);

// Probability mass of the integer bin v under N(tau, rho^2) discretized to
// unit bins: Phi(v+1/2) - Phi(v-1/2). `floored` applies the coding floor.
double GaussianBinMass(double v, double tau, double rho, bool floored = true);

// Tape versions used in the training loss.
Var GaussianBinMassTape(Var v, Var tau, Var rho);
Var RateBitsTape(Var p);

}  // namespace cgs
