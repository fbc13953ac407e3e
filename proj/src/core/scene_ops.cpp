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

#include "cgs/core/scene_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "cgs/common.hpp"

namespace cgs {

namespace {

using VoxelKey = std::tuple<int64_t, int64_t, int64_t>;

int64_t FloorDiv(double v, double step) {
  return static_cast<int64_t>(std::floor(v / step));
}

}  // namespace

std::vector<AnchorPrimitive> InitAnchors(const std::vector<Vec3d>& points,
                                         double voxel_size, uint64_t seed) {
  if (points.empty()) Fail("no points");
  Check(voxel_size > 0, "voxel_size must be positive");

  // Ordered map keeps anchor emission order independent of input order; the
  // points inside each voxel are sorted before averaging so centroids are
  // exactly permutation-invariant.
  std::map<VoxelKey, std::vector<Vec3d>> voxels;
  for (const Vec3d& p : points) {
    VoxelKey key{FloorDiv(p.x, voxel_size), FloorDiv(p.y, voxel_size),
                 FloorDiv(p.z, voxel_size)};
    voxels[key].push_back(p);
  }

  std::vector<AnchorPrimitive> anchors;
  anchors.reserve(voxels.size());
  for (auto& [key, pts] : voxels) {
    std::sort(pts.begin(), pts.end(), [](const Vec3d& a, const Vec3d& b) {
      return std::tie(a.x, a.y, a.z) < std::tie(b.x, b.y, b.z);
    });
    Vec3d sum{};
    for (const Vec3d& p : pts) sum = sum + p;
    AnchorPrimitive a;
    a.location = sum * (1.0 / static_cast<double>(pts.size()));
    anchors.push_back(a);
  }

  // Isotropic scale init: log of the mean nearest-neighbor distance among
  // anchor locations. Quadratic scan; anchor sets stay small at this stage.
  double mean_nn = voxel_size;
  if (anchors.size() > 1) {
    double total = 0.0;
    for (size_t i = 0; i < anchors.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (size_t j = 0; j < anchors.size(); ++j) {
        if (i == j) continue;
        best = std::min(best, Norm(anchors[i].location - anchors[j].location));
      }
      total += best;
    }
    mean_nn = total / static_cast<double>(anchors.size());
  }
  if (!(mean_nn > 0)) mean_nn = voxel_size;
  double log_scale = std::log(mean_nn);

  Rng rng(SplitMix64(seed ^ 0xA17C0B5Eull));
  for (AnchorPrimitive& a : anchors) {
    a.cov_scale = {log_scale, log_scale, log_scale};
    a.cov_rotation = QuatIdentity<double>();
    for (double& v : a.ref_embedding) v = rng.NextNormal(0.0, 0.01);
  }
  return anchors;
}

Scene AttachCoupled(std::vector<AnchorPrimitive> anchors,
                    int coupled_per_anchor) {
  Check(coupled_per_anchor >= 1, "K must be >= 1");
  Scene scene;
  scene.anchors = std::move(anchors);
  scene.coupled_per_anchor = coupled_per_anchor;
  scene.coupled.resize(scene.anchors.size() *
                       static_cast<size_t>(coupled_per_anchor));
  for (size_t i = 0; i < scene.anchors.size(); ++i)
    for (int k = 0; k < coupled_per_anchor; ++k)
      scene.coupled[i * coupled_per_anchor + k].anchor_index =
          static_cast<uint32_t>(i);
  return scene;
}

Scene PruneAnchors(const Scene& scene,
                   const std::vector<double>& max_opacity_per_anchor,
                   double threshold) {
  Check(max_opacity_per_anchor.size() == scene.anchor_count(),
        "opacity stats must cover all anchors");
  Scene out;
  out.coupled_per_anchor = scene.coupled_per_anchor;
  std::vector<uint32_t> remap(scene.anchor_count());
  for (size_t i = 0; i < scene.anchor_count(); ++i) {
    if (max_opacity_per_anchor[i] < threshold) continue;
    remap[i] = static_cast<uint32_t>(out.anchors.size());
    out.anchors.push_back(scene.anchors[i]);
    for (int k = 0; k < scene.coupled_per_anchor; ++k) {
      CoupledPrimitive c = scene.coupled[i * scene.coupled_per_anchor + k];
      c.anchor_index = remap[i];
      out.coupled.push_back(c);
    }
  }
  if (out.anchors.empty()) Fail("scene emptied");
  return out;
}

}  // namespace cgs
