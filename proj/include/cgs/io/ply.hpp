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

#include <string>
#include <vector>

#include "cgs/core/types.hpp"

namespace cgs {

// Binary little-endian PLY with float32 x/y/z vertex properties.
std::vector<Vec3d> LoadPlyPoints(const std::string& path);
void SavePlyPoints(const std::vector<Vec3d>& points, const std::string& path);

// Splat preview: positions, log-scales, rotation, opacity and color of
// decoded Gaussians (appearance fixed at the caller-chosen view).
void SavePlySplats(const std::vector<RenderableGaussian>& splats,
                   const std::string& path);

}  // namespace cgs
