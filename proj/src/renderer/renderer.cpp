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

#include "cgs/renderer/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace cgs {

std::optional<Splat2D> Project(const RenderableGaussian& g, const Camera& cam) {
  Vec3d t = cam.rotation * g.location + cam.translation;
  if (t.z <= kDepthCull) return std::nullopt;

  double inv_z = 1.0 / t.z;
  double u = cam.focal.x * t.x * inv_z + cam.principal_point.x;
  double v = cam.focal.y * t.y * inv_z + cam.principal_point.y;

  // V = W * Sigma * W^T in camera space.
  Mat3d ws = cam.rotation * g.covariance;
  Mat3d V = ws * cam.rotation.transposed();

  // J = [fx/z, 0, -fx x/z^2; 0, fy/z, -fy y/z^2]; cov2d = J V J^T.
  double j00 = cam.focal.x * inv_z;
  double j02 = -cam.focal.x * t.x * inv_z * inv_z;
  double j11 = cam.focal.y * inv_z;
  double j12 = -cam.focal.y * t.y * inv_z * inv_z;

  double r0x = j00 * V(0, 0) + j02 * V(2, 0);
  double r0y = j00 * V(0, 1) + j02 * V(2, 1);
  double r0z = j00 * V(0, 2) + j02 * V(2, 2);
  double r1x = j11 * V(1, 0) + j12 * V(2, 0);
  double r1y = j11 * V(1, 1) + j12 * V(2, 1);
  double r1z = j11 * V(1, 2) + j12 * V(2, 2);

  Splat2D s;
  s.cov_a = r0x * j00 + r0z * j02 + kLowPass;
  s.cov_b = r1x * j00 + r1z * j02;
  s.cov_c = r1y * j11 + r1z * j12 + kLowPass;
  s.mean2d = {u, v};
  s.depth = t.z;
  s.opacity = g.opacity;
  s.color = g.color;

  double mu = 3.0 * std::sqrt(s.cov_a);
  double mv = 3.0 * std::sqrt(s.cov_c);
  if (u < -mu || u > cam.width + mu || v < -mv || v > cam.height + mv)
    return std::nullopt;
  return s;
}

int RenderThreadCount() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("CGS_THREADS")) {
    long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1 && static_cast<unsigned>(cap) < hw)
      hw = static_cast<unsigned>(cap);
  }
  return static_cast<int>(hw);
}

namespace {

struct PreparedSplat {
  double mean_u, mean_v;
  double inv_a, inv_b, inv_c;
  double opacity;
  double r, g, b;
};

void RenderRows(const std::vector<PreparedSplat>& splats,
                const std::vector<std::vector<uint32_t>>& tile_lists,
                int tiles_x, int y0, int y1, const Vec3d& bg, bool early_exit,
                Image& img) {
  constexpr int kTile = 16;
  for (int y = y0; y < y1; ++y) {
    double pv = y + 0.5;
    for (int x = 0; x < img.width; ++x) {
      double pu = x + 0.5;
      const std::vector<uint32_t>& list =
          tile_lists[static_cast<size_t>(y / kTile) * tiles_x + x / kTile];
      double T = 1.0;
      double cr = 0.0, cg = 0.0, cb = 0.0;
      for (uint32_t si : list) {
        const PreparedSplat& s = splats[si];
        double du = pu - s.mean_u;
        double dv = pv - s.mean_v;
        double q = s.inv_a * du * du + 2.0 * s.inv_b * du * dv +
                   s.inv_c * dv * dv;
        if (q > kSupportQ) continue;
        double alpha = s.opacity * std::exp(-0.5 * q);
        if (alpha > kAlphaClamp) alpha = kAlphaClamp;
        cr += s.r * alpha * T;
        cg += s.g * alpha * T;
        cb += s.b * alpha * T;
        T *= 1.0 - alpha;
        if (early_exit && T < kEarlyExitT) break;
      }
      img.at(x, y, 0) = static_cast<float>(cr + bg.x * T);
      img.at(x, y, 1) = static_cast<float>(cg + bg.y * T);
      img.at(x, y, 2) = static_cast<float>(cb + bg.z * T);
    }
  }
}

}  // namespace

Image Render(std::span<const RenderableGaussian> gaussians, const Camera& cam,
             const Vec3d& background, const RenderOptions& opts) {
  constexpr int kTile = 16;
  Image img(cam.width, cam.height);

  struct Projected {
    Splat2D s;
    uint32_t index;
  };
  std::vector<Projected> projected;
  projected.reserve(gaussians.size());
  for (uint32_t i = 0; i < gaussians.size(); ++i) {
    if (auto s = Project(gaussians[i], cam))
      projected.push_back({*s, i});
  }
  std::sort(projected.begin(), projected.end(),
            [](const Projected& a, const Projected& b) {
              if (a.s.depth != b.s.depth) return a.s.depth < b.s.depth;
              return a.index < b.index;
            });

  std::vector<PreparedSplat> splats(projected.size());
  for (size_t i = 0; i < projected.size(); ++i) {
    const Splat2D& s = projected[i].s;
    double det = s.cov_a * s.cov_c - s.cov_b * s.cov_b;
    PreparedSplat& p = splats[i];
    p.mean_u = s.mean2d.x;
    p.mean_v = s.mean2d.y;
    p.inv_a = s.cov_c / det;
    p.inv_b = -s.cov_b / det;
    p.inv_c = s.cov_a / det;
    p.opacity = s.opacity;
    p.r = s.color.x;
    p.g = s.color.y;
    p.b = s.color.z;
  }

  int tiles_x = (img.width + kTile - 1) / kTile;
  int tiles_y = (img.height + kTile - 1) / kTile;
  std::vector<std::vector<uint32_t>> tile_lists(
      static_cast<size_t>(tiles_x) * tiles_y);
  for (uint32_t i = 0; i < splats.size(); ++i) {
    const Splat2D& s = projected[i].s;
    double ru = 3.0 * std::sqrt(s.cov_a);
    double rv = 3.0 * std::sqrt(s.cov_c);
    int tx0 = std::clamp(static_cast<int>((s.mean2d.x - ru) / kTile), 0,
                         tiles_x - 1);
    int tx1 = std::clamp(static_cast<int>((s.mean2d.x + ru) / kTile), 0,
                         tiles_x - 1);
    int ty0 = std::clamp(static_cast<int>((s.mean2d.y - rv) / kTile), 0,
                         tiles_y - 1);
    int ty1 = std::clamp(static_cast<int>((s.mean2d.y + rv) / kTile), 0,
                         tiles_y - 1);
    for (int ty = ty0; ty <= ty1; ++ty)
      for (int tx = tx0; tx <= tx1; ++tx)
        tile_lists[static_cast<size_t>(ty) * tiles_x + tx].push_back(i);
  }

  int threads = RenderThreadCount();
  if (threads <= 1 || img.height < 2 * kTile) {
    RenderRows(splats, tile_lists, tiles_x, 0, img.height, background,
               opts.early_exit, img);
  } else {
    // Static row partition: output is identical for any thread count since
    // pixels are independent.
    std::vector<std::thread> pool;
    int rows_per = (img.height + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      int y0 = t * rows_per;
      int y1 = std::min(img.height, y0 + rows_per);
      if (y0 >= y1) break;
      pool.emplace_back([&, y0, y1] {
        RenderRows(splats, tile_lists, tiles_x, y0, y1, background,
                   opts.early_exit, img);
      });
    }
    for (std::thread& th : pool) th.join();
  }
  return img;
}

}  // namespace cgs
