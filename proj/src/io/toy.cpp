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

#include "cgs/io/toy.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "cgs/common.hpp"
#include "cgs/train/trainer.hpp"

namespace cgs {

using nlohmann::json;

ToySceneSpec ToySpecFromJson(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    Fail("corrupt toy spec: " + std::string(e.what()));
  }
  ToySceneSpec spec;
  spec.gaussian_count = j.value("gaussian_count", spec.gaussian_count);
  spec.camera_count = j.value("camera_count", spec.camera_count);
  spec.image_size = j.value("image_size", spec.image_size);
  spec.seed = j.value("seed", spec.seed);
  spec.palette_size = j.value("palette_size", spec.palette_size);
  Check(spec.gaussian_count >= 1 && spec.camera_count >= 1 &&
            spec.image_size >= 1,
        "toy spec counts must be >= 1");
  return spec;
}

namespace {

Camera RingCamera(const Vec3d& centroid, double radius, double azimuth,
                  double elevation, int size) {
  Vec3d center = {centroid.x + radius * std::cos(azimuth) * std::cos(elevation),
                  centroid.y + radius * std::sin(azimuth) * std::cos(elevation),
                  centroid.z + radius * std::sin(elevation)};
  Vec3d fwd = centroid - center;
  double n = Norm(fwd);
  fwd = fwd * (1.0 / n);
  Vec3d up_world = {0, 0, 1};
  // right = fwd x up, down = fwd x right (camera x right, y down, z forward).
  Vec3d right = {fwd.y * up_world.z - fwd.z * up_world.y,
                 fwd.z * up_world.x - fwd.x * up_world.z,
                 fwd.x * up_world.y - fwd.y * up_world.x};
  right = right * (1.0 / Norm(right));
  Vec3d down = {fwd.y * right.z - fwd.z * right.y,
                fwd.z * right.x - fwd.x * right.z,
                fwd.x * right.y - fwd.y * right.x};

  Camera cam;
  cam.rotation.m = {right.x, right.y, right.z, down.x, down.y,
                    down.z,  fwd.x,   fwd.y,   fwd.z};
  Vec3d t = cam.rotation * center;
  cam.translation = {-t.x, -t.y, -t.z};
  cam.focal = {static_cast<double>(size), static_cast<double>(size)};
  cam.principal_point = {size / 2.0, size / 2.0};
  cam.width = size;
  cam.height = size;
  return cam;
}

void Quantize8(Image& img) {
  for (float& v : img.rgb) {
    float c = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
    v = static_cast<float>(std::lrint(c * 255.0f)) / 255.0f;
  }
}

}  // namespace

ToyScene MakeToyScene(const ToySceneSpec& spec) {
  ToyScene toy;
  Rng rng(SplitMix64(spec.seed ^ 0x70F5CE6Eull));

  // Saturated palette, seeded.
  std::vector<Vec3d> palette;
  for (int i = 0; i < spec.palette_size; ++i) {
    Vec3d c = {rng.NextUniform(0.1, 1.0), rng.NextUniform(0.1, 1.0),
               rng.NextUniform(0.1, 1.0)};
    int hi = rng.NextBelow(3);
    if (hi == 0) c.x = 1.0;
    if (hi == 1) c.y = 1.0;
    if (hi == 2) c.z = 1.0;
    palette.push_back(c);
  }

  for (int i = 0; i < spec.gaussian_count; ++i) {
    RenderableGaussian g;
    g.location = {rng.NextUniform(0.15, 0.85), rng.NextUniform(0.15, 0.85),
                  rng.NextUniform(0.15, 0.85)};
    double s0 = std::exp(rng.NextUniform(std::log(0.05), std::log(0.13)));
    double s1 = s0 * std::exp(rng.NextUniform(-0.5, 0.5));
    double s2 = s0 * std::exp(rng.NextUniform(-0.5, 0.5));
    Quatd q = {rng.NextNormal(), rng.NextNormal(), rng.NextNormal(),
               rng.NextNormal()};
    q = QuatNormalize(q);
    g.covariance = CovarianceFromParams(
        Vec3d{std::log(s0), std::log(s1), std::log(s2)}, q);
    g.opacity = rng.NextUniform(0.6, 0.95);
    Vec3d base = palette[rng.NextBelow(static_cast<uint32_t>(palette.size()))];
    double jitter = 0.9 + 0.2 * rng.NextDouble();
    g.color = {std::min(1.0, base.x * jitter), std::min(1.0, base.y * jitter),
               std::min(1.0, base.z * jitter)};
    toy.ground_truth.push_back(g);
    toy.dataset.points.push_back(g.location);
  }

  Vec3d centroid = {0, 0, 0};
  for (const Vec3d& p : toy.dataset.points) centroid = centroid + p;
  centroid = centroid * (1.0 / toy.dataset.points.size());

  for (int c = 0; c < spec.camera_count; ++c) {
    double az = 2.0 * M_PI * c / spec.camera_count;
    double el = 0.3 + 0.15 * ((c % 2 == 0) ? 1.0 : -1.0);
    Camera cam = RingCamera(centroid, 1.9, az, el, spec.image_size);
    Image img = Render(toy.ground_truth, cam, {0, 0, 0});
    Quantize8(img);  // dataset targets live at 8-bit precision
    toy.dataset.cameras.push_back(cam);
    toy.dataset.images.push_back(std::move(img));
  }
  SplitViews(toy.dataset.cameras.size(), toy.dataset.train_idx,
             toy.dataset.test_idx);
  return toy;
}

}  // namespace cgs
