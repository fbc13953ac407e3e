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

#include <array>

#include "cgs/renderer/renderer.hpp"

namespace cgs {

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;
inline constexpr double kSsimWeight = 0.2;  // D = 0.8*L1 + 0.2*(1 - SSIM)
inline constexpr double kPsnrCap = 100.0;

// Normalized 11-tap Gaussian window (sigma = 1.5).
std::array<double, kSsimWindow> SsimKernel();

double MeanAbsDiff(const Image& a, const Image& b);

// Mean SSIM over channels; 11x11 Gaussian window, valid region only.
double Ssim(const Image& a, const Image& b);

// Rendering loss: (1-w)*L1 + w*(1 - SSIM), w = 0.2.
double Distortion(const Image& rendered, const Image& target);

// 10*log10(1/MSE) on the [0,1] scale, capped at 100 dB.
double Psnr(const Image& a, const Image& b);

}  // namespace cgs
