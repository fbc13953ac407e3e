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

#include "cgs/renderer/metrics.hpp"

#include <cmath>
#include <vector>

#include "cgs/common.hpp"

namespace cgs {

std::array<double, kSsimWindow> SsimKernel() {
  std::array<double, kSsimWindow> k;
  double sum = 0.0;
  int r = kSsimWindow / 2;
  for (int i = 0; i < kSsimWindow; ++i) {
    double d = i - r;
    k[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

static void CheckDims(const Image& a, const Image& b) {
  Check(a.width == b.width && a.height == b.height,
        "image dimension mismatch");
}

double MeanAbsDiff(const Image& a, const Image& b) {
  CheckDims(a, b);
  double sum = 0.0;
  for (size_t i = 0; i < a.rgb.size(); ++i)
    sum += std::fabs(static_cast<double>(a.rgb[i]) - b.rgb[i]);
  return sum / static_cast<double>(a.rgb.size());
}

namespace {

// Separable valid convolution of one channel.
std::vector<double> ConvValid(const std::vector<double>& in, int w, int h,
                              const std::array<double, kSsimWindow>& k,
                              int& ow, int& oh) {
  int kw = kSsimWindow;
  ow = w - kw + 1;
  oh = h - kw + 1;
  std::vector<double> tmp(static_cast<size_t>(ow) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kw; ++i) acc += k[i] * in[static_cast<size_t>(y) * w + x + i];
      tmp[static_cast<size_t>(y) * ow + x] = acc;
    }
  std::vector<double> out(static_cast<size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kw; ++i)
        acc += k[i] * tmp[static_cast<size_t>(y + i) * ow + x];
      out[static_cast<size_t>(y) * ow + x] = acc;
    }
  return out;
}

}  // namespace

double Ssim(const Image& a, const Image& b) {
  CheckDims(a, b);
  Check(a.width >= kSsimWindow && a.height >= kSsimWindow,
        "image smaller than SSIM window");
  const auto kern = SsimKernel();
  const double c1 = kSsimK1 * kSsimK1;
  const double c2 = kSsimK2 * kSsimK2;

  int w = a.width, h = a.height;
  size_t n = static_cast<size_t>(w) * h;
  std::vector<double> pa(n), pb(n), paa(n), pbb(n), pab(n);
  double total = 0.0;
  for (int ch = 0; ch < 3; ++ch) {
    for (size_t i = 0; i < n; ++i) {
      double va = a.rgb[i * 3 + ch];
      double vb = b.rgb[i * 3 + ch];
      pa[i] = va;
      pb[i] = vb;
      paa[i] = va * va;
      pbb[i] = vb * vb;
      pab[i] = va * vb;
    }
    int ow, oh;
    std::vector<double> mu_a = ConvValid(pa, w, h, kern, ow, oh);
    std::vector<double> mu_b = ConvValid(pb, w, h, kern, ow, oh);
    std::vector<double> saa = ConvValid(paa, w, h, kern, ow, oh);
    std::vector<double> sbb = ConvValid(pbb, w, h, kern, ow, oh);
    std::vector<double> sab = ConvValid(pab, w, h, kern, ow, oh);
    double acc = 0.0;
    for (size_t i = 0; i < mu_a.size(); ++i) {
      double ma = mu_a[i], mb = mu_b[i];
      double va = saa[i] - ma * ma;
      double vb = sbb[i] - mb * mb;
      double cab = sab[i] - ma * mb;
      double num = (2.0 * ma * mb + c1) * (2.0 * cab + c2);
      double den = (ma * ma + mb * mb + c1) * (va + vb + c2);
      acc += num / den;
    }
    total += acc / static_cast<double>(mu_a.size());
  }
  return total / 3.0;
}

double Distortion(const Image& rendered, const Image& target) {
  return (1.0 - kSsimWeight) * MeanAbsDiff(rendered, target) +
         kSsimWeight * (1.0 - Ssim(rendered, target));
}

double Psnr(const Image& a, const Image& b) {
  CheckDims(a, b);
  double sum = 0.0;
  for (size_t i = 0; i < a.rgb.size(); ++i) {
    double d = static_cast<double>(a.rgb[i]) - b.rgb[i];
    sum += d * d;
  }
  double mse = sum / static_cast<double>(a.rgb.size());
  if (mse <= 0.0) return kPsnrCap;
  double psnr = 10.0 * std::log10(1.0 / mse);
  return psnr > kPsnrCap ? kPsnrCap : psnr;
}

}  // namespace cgs
