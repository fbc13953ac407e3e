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

#include <optional>
#include <span>
#include <vector>

#include "cgs/core/types.hpp"

namespace cgs {

// Compositing semantics (shared by the tiled renderer, the training path and
// reference implementations):
//   - splats are composited front-to-back in increasing (depth, input index)
//     order;
//   - per pixel with center (x+0.5, y+0.5): d = center - mean2d,
//     q = inv_a*du*du + 2*inv_b*du*dv + inv_c*dv*dv with [inv] the inverse of
//     the low-passed 2-D covariance; contributions with q > 9 are skipped;
//   - alpha = min(0.99, opacity * exp(-0.5*q));
//   - C = sum_i c_i*alpha_i*T_i + background*T_N, T_i = prod_{j<i}(1-alpha_j);
//   - optional early exit once T < 1e-4.

inline constexpr double kDepthCull = 0.01;
inline constexpr double kLowPass = 0.3;
inline constexpr double kSupportQ = 9.0;      // 3-sigma ellipse
inline constexpr double kAlphaClamp = 0.99;
inline constexpr double kEarlyExitT = 1e-4;

struct Splat2D {
  Vec2<double> mean2d;
  double cov_a = 0, cov_b = 0, cov_c = 0;  // low-passed 2-D covariance
  double depth = 0;
  double opacity = 0;
  Vec3d color{};
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> rgb;  // row-major, RGB interleaved, [0, 1]

  Image() = default;
  Image(int w, int h) : width(w), height(h), rgb(static_cast<size_t>(w) * h * 3) {}

  float& at(int x, int y, int c) {
    return rgb[(static_cast<size_t>(y) * width + x) * 3 + c];
  }
  float at(int x, int y, int c) const {
    return rgb[(static_cast<size_t>(y) * width + x) * 3 + c];
  }
};

struct RenderOptions {
  bool early_exit = true;
};

// EWA projection: cov2d = J W Sigma W^T J^T (upper-left 2x2) + 0.3*I with J
// the perspective Jacobian at the projected mean. Returns nullopt when the
// Gaussian is behind the near plane or its 3-sigma extent misses the image.
std::optional<Splat2D> Project(const RenderableGaussian& g, const Camera& cam);

Image Render(std::span<const RenderableGaussian> gaussians, const Camera& cam,
             const Vec3d& background, const RenderOptions& opts = {});

// Number of worker threads for row-parallel rendering; honors CGS_THREADS.
int RenderThreadCount();

}  // namespace cgs
