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
#include <vector>

#include "cgs/core/types.hpp"

namespace cgs {

// One anchor per occupied voxel, placed at the centroid of the voxel's
// points. Scales start isotropic at the mean nearest-neighbor distance of the
// anchor locations; embeddings are drawn from N(0, 0.01^2) with the given
// seed. Deterministic under permutation of the input points.
std::vector<AnchorPrimitive> InitAnchors(const std::vector<Vec3d>& points,
                                         double voxel_size,
                                         uint64_t seed = 0);

// Attaches K zero-initialized coupled primitives to every anchor,
// anchor-major order.
Scene AttachCoupled(std::vector<AnchorPrimitive> anchors, int coupled_per_anchor);

// Drops anchors whose accumulated max rendered opacity fell below the
// threshold, along with their coupled primitives. Indices are remapped.
Scene PruneAnchors(const Scene& scene,
                   const std::vector<double>& max_opacity_per_anchor,
                   double threshold);

}  // namespace cgs
