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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cgs/common.hpp"
#include "cgs/core/scene_ops.hpp"
#include "cgs/prediction/predict.hpp"

using namespace cgs;

namespace {

// Independent dense forward pass reading the documented flat weight layout.
std::vector<double> ReferenceMlpForward(const ResidualMlp& mlp,
                                        const std::vector<double>& x) {
  const auto& w = mlp.weights();
  int in = mlp.in_dim(), hid = mlp.hidden_dim(), out = mlp.out_dim();
  std::vector<double> h0(hid), h1(hid), y(out);
  for (int r = 0; r < hid; ++r) {
    double acc = w[mlp.off_b_in() + r];
    for (int i = 0; i < in; ++i) acc += w[mlp.off_w_in() + r * in + i] * x[i];
    h0[r] = std::max(acc, 0.0);
  }
  for (int r = 0; r < hid; ++r) {
    double acc = w[mlp.off_b_mid() + r];
    for (int i = 0; i < hid; ++i)
      acc += w[mlp.off_w_mid() + r * hid + i] * h0[i];
    h1[r] = h0[r] + std::max(acc, 0.0);
  }
  for (int r = 0; r < out; ++r) {
    double acc = w[mlp.off_b_out() + r];
    for (int i = 0; i < hid; ++i)
      acc += w[mlp.off_w_out() + r * hid + i] * h1[i];
    y[r] = acc;
  }
  return y;
}

AnchorPrimitive MakeAnchor(Rng& rng) {
  AnchorPrimitive a;
  a.location = {rng.NextNormal(), rng.NextNormal(), rng.NextNormal()};
  a.cov_scale = {rng.NextUniform(-2, 0), rng.NextUniform(-2, 0),
                 rng.NextUniform(-2, 0)};
  a.cov_rotation = QuatNormalize(Quatd{rng.NextNormal(), rng.NextNormal(),
                                       rng.NextNormal(), rng.NextNormal()});
  for (double& v : a.ref_embedding) v = rng.NextNormal();
  return a;
}

PredictionNetworks RandomNets(uint64_t seed) {
  PredictionNetworks nets;
  nets.InitWeights(seed);
  // Fill the zero-initialized output heads too, so predictions are generic.
  Rng rng(seed ^ 0x1234);
  for (ResidualMlp* m : {&nets.geo_translation, &nets.geo_scale,
                         &nets.geo_rotation, &nets.app_opacity,
                         &nets.app_color})
    for (double& w : m->weights())
      if (w == 0.0) w = rng.NextNormal(0.0, 0.05);
  return nets;
}

}  // namespace

TEST_CASE("fuse concatenates reference then residual embeddings") {
  AnchorPrimitive a;
  CoupledPrimitive c;
  SUBCASE("zeros") {
    PredictionFeatures h = Fuse(a, c);
    for (double v : h) CHECK(v == 0.0);
  }
  SUBCASE("constant blocks") {
    for (double& v : a.ref_embedding) v = 1.0;
    for (double& v : c.res_embedding) v = 2.0;
    PredictionFeatures h = Fuse(a, c);
    for (int i = 0; i < 32; ++i) CHECK(h[i] == 1.0);
    for (int i = 32; i < 40; ++i) CHECK(h[i] == 2.0);
  }
  SUBCASE("random, elementwise index oracle") {
    Rng rng(1);
    for (double& v : a.ref_embedding) v = rng.NextNormal();
    for (double& v : c.res_embedding) v = rng.NextNormal();
    PredictionFeatures h = Fuse(a, c);
    for (int i = 0; i < 40; ++i) {
      double want = i < 32 ? a.ref_embedding[i] : c.res_embedding[i - 32];
      CHECK(h[i] == want);
    }
  }
}

TEST_CASE("zero networks give the identity warp") {
  PredictionNetworks nets;  // all-zero weights
  PredictionFeatures h{};
  Rng rng(2);
  for (double& v : h) v = rng.NextNormal();
  AffineParams p = PredictAffine(h, nets);
  CHECK(p.translation.x == 0.0);
  CHECK(p.translation.y == 0.0);
  CHECK(p.translation.z == 0.0);
  CHECK(p.scale.x == 1.0);
  CHECK(p.scale.y == 1.0);
  CHECK(p.scale.z == 1.0);
  CHECK(p.rotation.w == 1.0);
  CHECK(p.rotation.x == 0.0);
}

TEST_CASE("scale head is an exponential map") {
  PredictionNetworks nets;
  // Bias-only network: psi(h) = (ln 2, 0, 0).
  nets.geo_scale.weights()[nets.geo_scale.off_b_out()] = std::log(2.0);
  PredictionFeatures h{};
  AffineParams p = PredictAffine(h, nets);
  CHECK(p.scale.x == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(p.scale.y == doctest::Approx(1.0));
  CHECK(p.scale.z == doctest::Approx(1.0));
}

TEST_CASE("predict_affine matches the reference MLP oracle") {
  PredictionNetworks nets = RandomNets(10);
  Rng rng(20);
  PredictionFeatures h;
  for (double& v : h) v = rng.NextNormal();

  std::vector<double> hx(h.begin(), h.end());
  auto t_ref = ReferenceMlpForward(nets.geo_translation, hx);
  auto s_ref = ReferenceMlpForward(nets.geo_scale, hx);
  auto r_ref = ReferenceMlpForward(nets.geo_rotation, hx);

  AffineParams p = PredictAffine(h, nets);
  CHECK(p.translation.x == doctest::Approx(t_ref[0]).epsilon(1e-6));
  CHECK(p.translation.y == doctest::Approx(t_ref[1]).epsilon(1e-6));
  CHECK(p.translation.z == doctest::Approx(t_ref[2]).epsilon(1e-6));
  CHECK(p.scale.x == doctest::Approx(std::exp(s_ref[0])).epsilon(1e-6));
  Quatd q = QuatNormalize(Quatd{r_ref[0] + 1.0, r_ref[1], r_ref[2], r_ref[3]});
  CHECK(p.rotation.w == doctest::Approx(q.w).epsilon(1e-6));
  CHECK(p.rotation.z == doctest::Approx(q.z).epsilon(1e-6));
}

TEST_CASE("apply_affine identity returns anchor geometry unchanged") {
  Rng rng(3);
  AnchorPrimitive a = MakeAnchor(rng);
  AffineParams id;
  WarpedGeometry g = ApplyAffine(a, id);
  CHECK(g.location.x == a.location.x);
  CHECK(g.cov_scale.x == doctest::Approx(a.cov_scale.x).epsilon(1e-15));
  CHECK(g.cov_rotation.w == doctest::Approx(a.cov_rotation.w).epsilon(1e-12));
  CHECK(g.cov_rotation.x == doctest::Approx(a.cov_rotation.x).epsilon(1e-12));
}

TEST_CASE("apply_affine translation only shifts the location") {
  Rng rng(4);
  AnchorPrimitive a = MakeAnchor(rng);
  AffineParams p;
  p.translation = {1, 0, 0};
  WarpedGeometry g = ApplyAffine(a, p);
  CHECK(g.location.x == doctest::Approx(a.location.x + 1.0));
  CHECK(g.location.y == doctest::Approx(a.location.y));
  CHECK(g.cov_scale.y == doctest::Approx(a.cov_scale.y));
  Mat3d before = CovarianceFromParams(a.cov_scale, a.cov_rotation);
  Mat3d after = CovarianceFromParams(g.cov_scale, g.cov_rotation);
  for (int i = 0; i < 9; ++i)
    CHECK(after.m[i] == doctest::Approx(before.m[i]).epsilon(1e-12));
}

TEST_CASE("apply_affine closed-form covariance: doubling a 0.5 extent") {
  AnchorPrimitive a;
  a.cov_scale = {std::log(0.5), std::log(0.5), std::log(0.5)};
  AffineParams p;
  p.scale = {2, 2, 2};
  WarpedGeometry g = ApplyAffine(a, p);
  Mat3d cov = CovarianceFromParams(g.cov_scale, g.cov_rotation);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(cov(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
}

TEST_CASE("apply_affine preserves covariance PSD for random warps") {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    AnchorPrimitive a = MakeAnchor(rng);
    AffineParams p;
    p.translation = {rng.NextNormal(), rng.NextNormal(), rng.NextNormal()};
    p.scale = {std::exp(rng.NextNormal()), std::exp(rng.NextNormal()),
               std::exp(rng.NextNormal())};
    p.rotation = QuatNormalize(Quatd{rng.NextNormal(), rng.NextNormal(),
                                     rng.NextNormal(), rng.NextNormal()});
    WarpedGeometry g = ApplyAffine(a, p);
    Mat3d c = CovarianceFromParams(g.cov_scale, g.cov_rotation);
    double m1 = c(0, 0);
    double m2 = c(0, 0) * c(1, 1) - c(0, 1) * c(1, 0);
    double m3 = c(0, 0) * (c(1, 1) * c(2, 2) - c(1, 2) * c(2, 1)) -
                c(0, 1) * (c(1, 0) * c(2, 2) - c(1, 2) * c(2, 0)) +
                c(0, 2) * (c(1, 0) * c(2, 1) - c(1, 1) * c(2, 0));
    CHECK(m1 >= -1e-9);
    CHECK(m2 >= -1e-9);
    CHECK(m3 >= -1e-9);
  }
}

TEST_CASE("view embedding points from camera to anchor") {
  Camera cam;  // identity pose at origin
  cam.focal = {64, 64};
  AnchorPrimitive a;
  a.location = {0, 0, 2};
  ViewEmbedding e = ViewEmbeddingOf(cam, a);
  CHECK(e.direction.x == doctest::Approx(0.0));
  CHECK(e.direction.y == doctest::Approx(0.0));
  CHECK(e.direction.z == doctest::Approx(1.0));
  CHECK(e.inv_distance == doctest::Approx(0.5));
}

TEST_CASE("coincident camera and anchor is a degenerate view") {
  Camera cam;
  AnchorPrimitive a;
  a.location = {0, 0, 0};
  CHECK_THROWS_WITH(ViewEmbeddingOf(cam, a), "degenerate view");
}

TEST_CASE("view direction is unit norm for random poses") {
  Rng rng(8);
  for (int t = 0; t < 30; ++t) {
    Camera cam;
    cam.translation = {rng.NextNormal(), rng.NextNormal(), rng.NextNormal()};
    AnchorPrimitive a;
    a.location = {rng.NextNormal() * 3, rng.NextNormal() * 3,
                  rng.NextNormal() * 3};
    ViewEmbedding e = ViewEmbeddingOf(cam, a);
    CHECK(std::fabs(Norm(e.direction) - 1.0) < 1e-9);
    CHECK(e.inv_distance > 0);
  }
}

TEST_CASE("zero appearance nets output 0.5 opacity and gray") {
  PredictionNetworks nets;
  PredictionFeatures h{};
  ViewEmbedding e{{0, 0, 1}, 0.5};
  Appearance app = PredictAppearance(h, e, nets);
  CHECK(app.opacity == doctest::Approx(0.5));
  CHECK(app.color.x == doctest::Approx(0.5));
  CHECK(app.color.y == doctest::Approx(0.5));
  CHECK(app.color.z == doctest::Approx(0.5));
}

TEST_CASE("large opacity head saturates toward 1") {
  PredictionNetworks nets;
  nets.app_opacity.weights()[nets.app_opacity.off_b_out()] = 20.0;
  Appearance app = PredictAppearance({}, {{0, 0, 1}, 1.0}, nets);
  CHECK(app.opacity > 0.999999);
  CHECK(app.opacity < 1.0);
}

TEST_CASE("predict_appearance matches the reference oracle") {
  PredictionNetworks nets = RandomNets(55);
  Rng rng(56);
  PredictionFeatures h;
  for (double& v : h) v = rng.NextNormal();
  ViewEmbedding e{{0.6, 0.0, 0.8}, 0.7};

  std::vector<double> in = {0.6, 0.0, 0.8, 0.7};
  in.insert(in.end(), h.begin(), h.end());
  auto o_ref = ReferenceMlpForward(nets.app_opacity, in);
  auto c_ref = ReferenceMlpForward(nets.app_color, in);

  Appearance app = PredictAppearance(h, e, nets);
  auto sg = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  CHECK(app.opacity == doctest::Approx(sg(o_ref[0])).epsilon(1e-6));
  CHECK(app.color.x == doctest::Approx(sg(c_ref[0])).epsilon(1e-6));
  CHECK(app.color.z == doctest::Approx(sg(c_ref[2])).epsilon(1e-6));
}

TEST_CASE("decode_coupled: identity case yields anchors with 0.5 opacity") {
  PredictionNetworks nets;  // zero weights
  auto anchors = InitAnchors({{0.5, 0.5, 0.5}}, 1.0, 0);
  for (double& v : anchors[0].ref_embedding) v = 0;  // exact zero embeddings
  Scene s = AttachCoupled(anchors, 2);
  Camera cam;
  cam.translation = {0, 0, 3};
  cam.focal = {64, 64};
  cam.principal_point = {32, 32};
  cam.width = cam.height = 64;

  auto gs = DecodeCoupled(s, cam, nets);
  REQUIRE(gs.size() == 2);
  for (const RenderableGaussian& g : gs) {
    CHECK(g.location.x == s.anchors[0].location.x);
    CHECK(g.opacity == doctest::Approx(0.5));
    CHECK(g.color.y == doctest::Approx(0.5));
  }
  // Two identical coupled primitives decode identically.
  CHECK(gs[0].covariance.m == gs[1].covariance.m);
}

TEST_CASE("decode_coupled equals manual composition on a random scene") {
  Rng rng(99);
  PredictionNetworks nets = RandomNets(99);
  std::vector<Vec3d> pts;
  for (int i = 0; i < 5; ++i)
    pts.push_back({rng.NextDouble() * 3, rng.NextDouble() * 3,
                   rng.NextDouble() * 3});
  Scene s = AttachCoupled(InitAnchors(pts, 0.3, 1), 3);
  for (CoupledPrimitive& c : s.coupled)
    for (double& v : c.res_embedding) v = rng.NextNormal(0, 0.3);

  Camera cam;
  cam.translation = {0.2, -0.1, 6};
  cam.focal = {64, 64};
  cam.principal_point = {32, 32};
  cam.width = cam.height = 64;

  auto gs = DecodeCoupled(s, cam, nets);
  REQUIRE(gs.size() == s.coupled.size());
  for (size_t i = 0; i < gs.size(); ++i) {
    const CoupledPrimitive& c = s.coupled[i];
    const AnchorPrimitive& a = s.anchors[c.anchor_index];
    PredictionFeatures h = Fuse(a, c);
    WarpedGeometry geo = ApplyAffine(a, PredictAffine(h, nets));
    Appearance app = PredictAppearance(h, ViewEmbeddingOf(cam, a), nets);
    Mat3d cov = CovarianceFromParams(geo.cov_scale, geo.cov_rotation);
    CHECK(gs[i].location.x == geo.location.x);
    CHECK(gs[i].location.z == geo.location.z);
    for (int j = 0; j < 9; ++j) CHECK(gs[i].covariance.m[j] == cov.m[j]);
    CHECK(gs[i].opacity == app.opacity);
    CHECK(gs[i].color.x == app.color.x);
  }
}

TEST_CASE("decode order follows anchor storage order") {
  Rng rng(15);
  PredictionNetworks nets = RandomNets(15);
  std::vector<Vec3d> pts = {{0, 0, 0}, {3, 0, 0}};
  Scene s = AttachCoupled(InitAnchors(pts, 1.0, 2), 2);
  Camera cam;
  cam.translation = {0, 0, 8};
  cam.focal = {32, 32};
  cam.principal_point = {16, 16};
  cam.width = cam.height = 32;

  auto gs = DecodeCoupled(s, cam, nets);

  // Swap anchor order (and remap coupled indices); output blocks swap.
  Scene swapped;
  swapped.coupled_per_anchor = 2;
  swapped.anchors = {s.anchors[1], s.anchors[0]};
  swapped.coupled = {s.coupled[2], s.coupled[3], s.coupled[0], s.coupled[1]};
  swapped.coupled[0].anchor_index = 0;
  swapped.coupled[1].anchor_index = 0;
  swapped.coupled[2].anchor_index = 1;
  swapped.coupled[3].anchor_index = 1;
  auto gs2 = DecodeCoupled(swapped, cam, nets);
  CHECK(gs2[0].location.x == gs[2].location.x);
  CHECK(gs2[2].location.x == gs[0].location.x);
  CHECK(gs2[1].opacity == gs[3].opacity);
}
