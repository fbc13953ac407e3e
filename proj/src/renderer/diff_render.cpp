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

#include "cgs/renderer/diff_render.hpp"

#include <algorithm>

#include "cgs/renderer/metrics.hpp"

namespace cgs {

uint32_t RenderTape(Tape& tape, const std::vector<TapeGaussian>& gaussians,
                    const Camera& cam, const Vec3d& background,
                    double q_cutoff, std::vector<double>* max_alpha) {
  std::vector<uint32_t> table;
  std::vector<double> depths;
  std::vector<uint32_t> src_index;
  table.reserve(gaussians.size() * 9);
  depths.reserve(gaussians.size());
  if (max_alpha) max_alpha->assign(gaussians.size(), 0.0);

  const Mat3d& W = cam.rotation;
  for (uint32_t gi = 0; gi < gaussians.size(); ++gi) {
    const TapeGaussian& gsn = gaussians[gi];
    Var lx(tape, gsn.location[0]), ly(tape, gsn.location[1]),
        lz(tape, gsn.location[2]);
    Var tx = W(0, 0) * lx + W(0, 1) * ly + W(0, 2) * lz + cam.translation.x;
    Var ty = W(1, 0) * lx + W(1, 1) * ly + W(1, 2) * lz + cam.translation.y;
    Var tz = W(2, 0) * lx + W(2, 1) * ly + W(2, 2) * lz + cam.translation.z;
    if (tz.val() <= kDepthCull) continue;

    Var inv_z = 1.0 / tz;
    Var u = cam.focal.x * tx * inv_z + cam.principal_point.x;
    Var v = cam.focal.y * ty * inv_z + cam.principal_point.y;

    // Full symmetric covariance from the upper triangle.
    Var S[3][3] = {
        {Var(tape, gsn.cov[0]), Var(tape, gsn.cov[1]), Var(tape, gsn.cov[2])},
        {Var(tape, gsn.cov[1]), Var(tape, gsn.cov[3]), Var(tape, gsn.cov[4])},
        {Var(tape, gsn.cov[2]), Var(tape, gsn.cov[4]), Var(tape, gsn.cov[5])}};

    // V = W * S * W^T, row by row.
    Var WS[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        WS[i][j] = W(i, 0) * S[0][j] + W(i, 1) * S[1][j] + W(i, 2) * S[2][j];
    Var V[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        V[i][j] = WS[i][0] * W(j, 0) + WS[i][1] * W(j, 1) + WS[i][2] * W(j, 2);

    Var j00 = cam.focal.x * inv_z;
    Var j02 = -cam.focal.x * tx * inv_z * inv_z;
    Var j11 = cam.focal.y * inv_z;
    Var j12 = -cam.focal.y * ty * inv_z * inv_z;

    Var r0x = j00 * V[0][0] + j02 * V[2][0];
    Var r0z = j00 * V[0][2] + j02 * V[2][2];
    Var r1x = j11 * V[1][0] + j12 * V[2][0];
    Var r1y = j11 * V[1][1] + j12 * V[2][1];
    Var r1z = j11 * V[1][2] + j12 * V[2][2];

    Var cov_a = r0x * j00 + r0z * j02 + kLowPass;
    Var cov_b = r1x * j00 + r1z * j02;
    Var cov_c = r1y * j11 + r1z * j12 + kLowPass;

    Var det = cov_a * cov_c - cov_b * cov_b;
    Var inv_a = cov_c / det;
    Var inv_b = -cov_b / det;
    Var inv_c = cov_a / det;

    table.push_back(u.id);
    table.push_back(v.id);
    table.push_back(inv_a.id);
    table.push_back(inv_b.id);
    table.push_back(inv_c.id);
    table.push_back(gsn.opacity);
    table.push_back(gsn.color[0]);
    table.push_back(gsn.color[1]);
    table.push_back(gsn.color[2]);
    depths.push_back(tz.val());
    src_index.push_back(gi);
  }

  std::vector<uint32_t> order(depths.size());
  for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
    if (depths[a] != depths[b]) return depths[a] < depths[b];
    return a < b;
  });

  double bg[3] = {background.x, background.y, background.z};
  std::vector<double> alpha_local;
  uint32_t out =
      tape.PushComposite(table, order, cam.width, cam.height, bg, q_cutoff,
                         max_alpha ? &alpha_local : nullptr);
  if (max_alpha)
    for (size_t i = 0; i < alpha_local.size(); ++i)
      (*max_alpha)[src_index[i]] = alpha_local[i];
  return out;
}

Var DistortionTape(Tape& tape, uint32_t image_base, const Image& target) {
  int w = target.width, h = target.height;
  size_t n = static_cast<size_t>(w) * h;

  // L1 term.
  Var l1_sum;
  {
    bool first = true;
    for (size_t i = 0; i < n * 3; ++i) {
      Var d = abs(Var(tape, image_base + static_cast<uint32_t>(i)) -
                  static_cast<double>(target.rgb[i]));
      l1_sum = first ? d : l1_sum + d;
      first = false;
    }
  }
  Var l1 = l1_sum / static_cast<double>(n * 3);

  // SSIM term; target-side statistics are plain constants.
  const auto kern = SsimKernel();
  const double c1 = kSsimK1 * kSsimK1;
  const double c2 = kSsimK2 * kSsimK2;
  std::vector<uint32_t> ch_ids(n), sq_ids(n), xb_ids(n);
  std::vector<double> tb(n), tbb(n);

  auto conv_const = [&](const std::vector<double>& in, int& ow, int& oh) {
    ow = w - kSsimWindow + 1;
    oh = h - kSsimWindow + 1;
    std::vector<double> tmp(static_cast<size_t>(ow) * h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < ow; ++x) {
        double acc = 0.0;
        for (int i = 0; i < kSsimWindow; ++i)
          acc += kern[i] * in[static_cast<size_t>(y) * w + x + i];
        tmp[static_cast<size_t>(y) * ow + x] = acc;
      }
    std::vector<double> out(static_cast<size_t>(ow) * oh);
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) {
        double acc = 0.0;
        for (int i = 0; i < kSsimWindow; ++i)
          acc += kern[i] * tmp[static_cast<size_t>(y + i) * ow + x];
        out[static_cast<size_t>(y) * ow + x] = acc;
      }
    return out;
  };

  auto conv_tape = [&](std::span<const uint32_t> ids) {
    uint32_t hpass = tape.PushConv1D(ids, w, h, kern, true);
    int ow = w - kSsimWindow + 1;
    std::vector<uint32_t> hp_ids(static_cast<size_t>(ow) * h);
    for (size_t i = 0; i < hp_ids.size(); ++i)
      hp_ids[i] = hpass + static_cast<uint32_t>(i);
    return tape.PushConv1D(hp_ids, ow, h, kern, false);
  };

  Var ssim_sum;
  bool first = true;
  int ow = 0, oh = 0;
  for (int ch = 0; ch < 3; ++ch) {
    for (size_t i = 0; i < n; ++i) {
      uint32_t id = image_base + static_cast<uint32_t>(i * 3 + ch);
      double t = target.rgb[i * 3 + ch];
      ch_ids[i] = id;
      Var a(tape, id);
      sq_ids[i] = (a * a).id;
      xb_ids[i] = (a * t).id;
      tb[i] = t;
      tbb[i] = t * t;
    }
    uint32_t mu_a = conv_tape(ch_ids);
    uint32_t saa = conv_tape(sq_ids);
    uint32_t sab = conv_tape(xb_ids);
    std::vector<double> mu_b = conv_const(tb, ow, oh);
    std::vector<double> sbb = conv_const(tbb, ow, oh);

    for (size_t i = 0; i < mu_b.size(); ++i) {
      Var ma(tape, mu_a + static_cast<uint32_t>(i));
      double mb = mu_b[i];
      Var va = Var(tape, saa + static_cast<uint32_t>(i)) - ma * ma;
      double vb = sbb[i] - mb * mb;
      Var cab = Var(tape, sab + static_cast<uint32_t>(i)) - ma * mb;
      Var num = (2.0 * mb * ma + c1) * (2.0 * cab + c2);
      Var den = (ma * ma + mb * mb + c1) * (va + vb + c2);
      Var s = num / den;
      ssim_sum = first ? s : ssim_sum + s;
      first = false;
    }
  }
  Var ssim = ssim_sum / (3.0 * static_cast<double>(ow) * oh);

  return (1.0 - kSsimWeight) * l1 + kSsimWeight * (1.0 - ssim);
}

}  // namespace cgs
