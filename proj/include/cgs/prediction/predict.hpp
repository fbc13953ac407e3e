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
#include <vector>

#include "cgs/core/types.hpp"
#include "cgs/prediction/mlp.hpp"

namespace cgs {

inline constexpr int kPredictionFeatureDim =
    kRefEmbeddingDim + kResEmbeddingDim;  // 40
inline constexpr int kViewEmbeddingDim = 4;

using PredictionFeatures = std::array<double, kPredictionFeatureDim>;

// Affine warp of anchor geometry: identity when all fields are neutral.
struct AffineParams {
  Vec3d translation{};
  Vec3d scale{1.0, 1.0, 1.0};        // positive diagonal
  Quatd rotation = QuatIdentity<double>();
};

// Camera-dependent conditioning for appearance prediction.
struct ViewEmbedding {
  Vec3d direction{};     // unit vector camera -> anchor
  double inv_distance = 0.0;
};

// The five prediction heads. Geometry heads consume the 40-dim fused
// features; appearance heads additionally see the 4-dim view embedding.
struct PredictionNetworks {
  ResidualMlp geo_translation{kPredictionFeatureDim, 3};
  ResidualMlp geo_scale{kPredictionFeatureDim, 3};
  ResidualMlp geo_rotation{kPredictionFeatureDim, 4};
  ResidualMlp app_opacity{kPredictionFeatureDim + kViewEmbeddingDim, 1};
  ResidualMlp app_color{kPredictionFeatureDim + kViewEmbeddingDim, 3};

  void InitWeights(uint64_t seed);
  size_t param_count() const;
};

PredictionFeatures Fuse(const AnchorPrimitive& anchor,
                        const CoupledPrimitive& coupled);

AffineParams PredictAffine(const PredictionFeatures& h,
                           const PredictionNetworks& nets);

struct WarpedGeometry {
  Vec3d location;
  Vec3d cov_scale;
  Quatd cov_rotation;
};

WarpedGeometry ApplyAffine(const AnchorPrimitive& anchor,
                           const AffineParams& params);

ViewEmbedding ViewEmbeddingOf(const Camera& camera,
                              const AnchorPrimitive& anchor);

struct Appearance {
  double opacity;
  Vec3d color;
};

Appearance PredictAppearance(const PredictionFeatures& h,
                             const ViewEmbedding& eps,
                             const PredictionNetworks& nets);

// Full decode: every coupled primitive becomes a renderable Gaussian, in
// anchor-major, coupled-minor order.
std::vector<RenderableGaussian> DecodeCoupled(const Scene& scene,
                                              const Camera& camera,
                                              const PredictionNetworks& nets);

}  // namespace cgs
