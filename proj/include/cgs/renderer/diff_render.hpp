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

#include <vector>

#include "cgs/autodiff/tape.hpp"
#include "cgs/core/types.hpp"
#include "cgs/renderer/renderer.hpp"

namespace cgs {

// Node ids of one renderable Gaussian on the tape. Covariance is the upper
// triangle (xx, xy, xz, yy, yz, zz).
struct TapeGaussian {
  uint32_t location[3];
  uint32_t cov[6];
  uint32_t opacity;
  uint32_t color[3];
};

// Differentiable render of the given Gaussians into a w*h*3 contiguous node
// range. Splats behind the near plane are dropped (by value); there is no
// screen-bounds culling so location gradients stay alive for off-screen
// splats. q_cutoff bounds each splat's pixel support in squared
// Mahalanobis units; pass a huge value for exact (smooth) rendering.
// max_alpha, when given, receives each input Gaussian's maximum composited
// alpha over the image (0 for culled ones).
uint32_t RenderTape(Tape& tape, const std::vector<TapeGaussian>& gaussians,
                    const Camera& cam, const Vec3d& background,
                    double q_cutoff, std::vector<double>* max_alpha = nullptr);

// Rendering loss against a constant target: 0.8*L1 + 0.2*(1 - SSIM).
Var DistortionTape(Tape& tape, uint32_t image_base, const Image& target);

}  // namespace cgs
