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
#include <cstdint>
#include <vector>

#include "cgs/vecmath.hpp"

namespace cgs {

inline constexpr int kRefEmbeddingDim = 32;
inline constexpr int kResEmbeddingDim = 8;
inline constexpr int kCovParamDim = 7;  // 3 log-scales + 4 quaternion

using Vec3d = Vec3<double>;
using Quatd = Quat<double>;
using Mat3d = Mat3<double>;

// Prediction reference unit: full geometry plus a reference embedding.
// Covariance is stored decomposed (log-scales + unit quaternion) so it stays
// positive semi-definite under unconstrained optimization; the quantized
// covariance stream codes these 7 scalars.
struct AnchorPrimitive {
  Vec3d location{};                               // world-space meters
  Vec3d cov_scale{};                              // log extents
  Quatd cov_rotation = QuatIdentity<double>();    // unit quaternion
  std::array<double, kRefEmbeddingDim> ref_embedding{};

  Mat3d covariance() const {
    return CovarianceFromParams(cov_scale, cov_rotation);
  }
};

// Coupled primitive: everything renderable is predicted from its anchor; only
// the residual embedding is stored.
struct CoupledPrimitive {
  uint32_t anchor_index = 0;
  std::array<double, kResEmbeddingDim> res_embedding{};
};

// The unit consumed by the splatting renderer.
struct RenderableGaussian {
  Vec3d location{};
  Mat3d covariance{};   // symmetric PSD
  double opacity = 0;   // [0, 1]
  Vec3d color{};        // [0, 1]^3
};

struct Scene {
  std::vector<AnchorPrimitive> anchors;
  std::vector<CoupledPrimitive> coupled;  // grouped K per anchor, anchor-major
  int coupled_per_anchor = 10;

  size_t anchor_count() const { return anchors.size(); }
  size_t coupled_count() const { return coupled.size(); }
};

// Pinhole camera; world-to-camera transform x_cam = rotation * x + translation.
struct Camera {
  Mat3d rotation = Mat3Identity<double>();
  Vec3d translation{};
  Vec2<double> focal{};            // fx, fy in pixels
  Vec2<double> principal_point{};  // cx, cy in pixels
  int width = 0;
  int height = 0;

  Vec3d center() const {
    // C = -R^T * t
    Mat3d rt = rotation.transposed();
    Vec3d c = rt * translation;
    return {-c.x, -c.y, -c.z};
  }
};

}  // namespace cgs
