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
#include <string>
#include <vector>

#include "cgs/io/dataset.hpp"

namespace cgs {

// Synthetic benchmark scene: seeded random Gaussians in the unit cube viewed
// from a camera ring, with ground-truth images rendered by the splatting
// renderer.
struct ToySceneSpec {
  int gaussian_count = 64;
  int camera_count = 8;
  int image_size = 64;
  uint64_t seed = 7;
  int palette_size = 6;
};

ToySceneSpec ToySpecFromJson(const std::string& path);

struct ToyScene {
  std::vector<RenderableGaussian> ground_truth;
  Dataset dataset;
};

ToyScene MakeToyScene(const ToySceneSpec& spec);

}  // namespace cgs
