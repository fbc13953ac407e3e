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

#include "cgs/prediction/predict.hpp"

#include <cmath>

#include "cgs/common.hpp"

namespace cgs {

void PredictionNetworks::InitWeights(uint64_t seed) {
  Rng rng(SplitMix64(seed ^ 0x9E11D1C7ull));
  geo_translation.InitWeights(rng);
  geo_scale.InitWeights(rng);
  geo_rotation.InitWeights(rng);
  app_opacity.InitWeights(rng);
  app_color.InitWeights(rng);
}

size_t PredictionNetworks::param_count() const {
  return geo_translation.param_count() + geo_scale.param_count() +
         geo_rotation.param_count() + app_opacity.param_count() +
         app_color.param_count();
}

PredictionFeatures Fuse(const AnchorPrimitive& anchor,
                        const CoupledPrimitive& coupled) {
  PredictionFeatures h;
  for (int i = 0; i < kRefEmbeddingDim; ++i) h[i] = anchor.ref_embedding[i];
  for (int i = 0; i < kResEmbeddingDim; ++i)
    h[kRefEmbeddingDim + i] = coupled.res_embedding[i];
  return h;
}

AffineParams PredictAffine(const PredictionFeatures& h,
                           const PredictionNetworks& nets) {
  AffineParams p;
  std::array<double, 3> t, s;
  std::array<double, 4> r;
  nets.geo_translation.Forward(h, t);
  nets.geo_scale.Forward(h, s);
  nets.geo_rotation.Forward(h, r);
  p.translation = {t[0], t[1], t[2]};
  p.scale = {std::exp(s[0]), std::exp(s[1]), std::exp(s[2])};
  p.rotation = QuatNormalize(Quatd{r[0] + 1.0, r[1], r[2], r[3]});
  return p;
}

WarpedGeometry ApplyAffine(const AnchorPrimitive& anchor,
                           const AffineParams& params) {
  WarpedGeometry g;
  g.location = anchor.location + params.translation;
  g.cov_scale = {anchor.cov_scale.x + std::log(params.scale.x),
                 anchor.cov_scale.y + std::log(params.scale.y),
                 anchor.cov_scale.z + std::log(params.scale.z)};
  g.cov_rotation = QuatNormalize(QuatMul(params.rotation, anchor.cov_rotation));
  return g;
}

ViewEmbedding ViewEmbeddingOf(const Camera& camera,
                              const AnchorPrimitive& anchor) {
  Vec3d d = anchor.location - camera.center();
  double dist = Norm(d);
  if (!(dist > 0)) Fail("degenerate view");
  return {d * (1.0 / dist), 1.0 / dist};
}

Appearance PredictAppearance(const PredictionFeatures& h,
                             const ViewEmbedding& eps,
                             const PredictionNetworks& nets) {
  std::array<double, kPredictionFeatureDim + kViewEmbeddingDim> in;
  in[0] = eps.direction.x;
  in[1] = eps.direction.y;
  in[2] = eps.direction.z;
  in[3] = eps.inv_distance;
  for (int i = 0; i < kPredictionFeatureDim; ++i)
    in[kViewEmbeddingDim + i] = h[i];
  double o;
  std::array<double, 3> c;
  nets.app_opacity.Forward(in, std::span<double>(&o, 1));
  nets.app_color.Forward(in, c);
  auto sg = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  return {sg(o), {sg(c[0]), sg(c[1]), sg(c[2])}};
}

std::vector<RenderableGaussian> DecodeCoupled(const Scene& scene,
                                              const Camera& camera,
                                              const PredictionNetworks& nets) {
  std::vector<RenderableGaussian> out;
  out.reserve(scene.coupled.size());
  std::vector<ViewEmbedding> eps(scene.anchors.size());
  for (size_t i = 0; i < scene.anchors.size(); ++i)
    eps[i] = ViewEmbeddingOf(camera, scene.anchors[i]);
  for (const CoupledPrimitive& c : scene.coupled) {
    const AnchorPrimitive& a = scene.anchors[c.anchor_index];
    PredictionFeatures h = Fuse(a, c);
    AffineParams warp = PredictAffine(h, nets);
    WarpedGeometry geo = ApplyAffine(a, warp);
    Appearance app = PredictAppearance(h, eps[c.anchor_index], nets);
    RenderableGaussian g;
    g.location = geo.location;
    g.covariance = CovarianceFromParams(geo.cov_scale, geo.cov_rotation);
    g.opacity = app.opacity;
    g.color = app.color;
    out.push_back(g);
  }
  return out;
}

}  // namespace cgs
