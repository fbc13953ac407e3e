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

#include "cgs/coder/location_codec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cgs/coder/range_coder.hpp"
#include "cgs/common.hpp"
#include "cgs/entropy/quant.hpp"

namespace cgs {

double DefaultLocationStep(const std::vector<Vec3d>& points) {
  Check(!points.empty(), "no points");
  Vec3d lo = points[0], hi = points[0];
  for (const Vec3d& p : points) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  double diag = Norm(hi - lo);
  return diag > 0 ? diag * 1e-3 : 1e-3;
}

LocationGrid QuantizeLocations(const std::vector<Vec3d>& points, double step) {
  Check(!points.empty(), "no points");
  Check(step > 0, "location step must be positive");
  Vec3d lo = points[0];
  for (const Vec3d& p : points) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
  }

  LocationGrid grid;
  grid.step = static_cast<float>(step);
  double ds = static_cast<double>(grid.step);
  for (int a = 0; a < 3; ++a) {
    double v = a == 0 ? lo.x : (a == 1 ? lo.y : lo.z);
    float f = static_cast<float>(v);
    // The f32 origin must not exceed the true minimum or coordinates would
    // go negative.
    while (static_cast<double>(f) > v)
      f = std::nextafterf(f, -std::numeric_limits<float>::infinity());
    grid.origin[a] = f;
  }

  grid.coords.reserve(points.size());
  for (const Vec3d& p : points) {
    std::array<uint32_t, 3> c;
    const double po[3] = {p.x, p.y, p.z};
    for (int a = 0; a < 3; ++a) {
      double rel = (po[a] - static_cast<double>(grid.origin[a])) / ds;
      if (!(rel < static_cast<double>(1 << kLocationGridBits) - 0.5))
        Fail("grid overflow");
      int32_t v = Quantize(rel, 1.0);
      c[a] = static_cast<uint32_t>(v);
    }
    grid.coords.push_back(c);
  }
  return grid;
}

uint64_t MortonEncode(uint32_t x, uint32_t y, uint32_t z) {
  auto expand = [](uint64_t v) {
    v &= 0x1FFFFF;  // 21 bits
    v = (v | v << 32) & 0x1F00000000FFFFull;
    v = (v | v << 16) & 0x1F0000FF0000FFull;
    v = (v | v << 8) & 0x100F00F00F00F00Full;
    v = (v | v << 4) & 0x10C30C30C30C30C3ull;
    v = (v | v << 2) & 0x1249249249249249ull;
    return v;
  };
  return expand(x) | (expand(y) << 1) | (expand(z) << 2);
}

namespace {

uint64_t MortonOf(const std::array<uint32_t, 3>& c) {
  return MortonEncode(c[0], c[1], c[2]);
}

void MortonDecode(uint64_t key, std::array<uint32_t, 3>& c) {
  auto compact = [](uint64_t v) {
    v &= 0x1249249249249249ull;
    v = (v ^ (v >> 2)) & 0x10C30C30C30C30C3ull;
    v = (v ^ (v >> 4)) & 0x100F00F00F00F00Full;
    v = (v ^ (v >> 8)) & 0x1F0000FF0000FFull;
    v = (v ^ (v >> 16)) & 0x1F00000000FFFFull;
    v = (v ^ (v >> 32)) & 0x1FFFFF;
    return static_cast<uint32_t>(v);
  };
  c[0] = compact(key);
  c[1] = compact(key >> 1);
  c[2] = compact(key >> 2);
}

}  // namespace

std::vector<uint32_t> MortonOrder(const LocationGrid& grid) {
  std::vector<uint32_t> order(grid.coords.size());
  for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
    return MortonOf(grid.coords[a]) < MortonOf(grid.coords[b]);
  });
  return order;
}

std::vector<uint8_t> EncodeLocations(
    const std::vector<std::array<uint32_t, 3>>& sorted_coords) {
  RangeEncoder enc;
  AdaptiveByteModel model;
  uint64_t prev = 0;
  for (size_t i = 0; i < sorted_coords.size(); ++i) {
    uint64_t key = MortonOf(sorted_coords[i]);
    Check(key >= prev, "locations must be Morton-sorted");
    uint64_t delta = key - prev;
    prev = key;
    // 7-bit groups, LSB first, bit 7 flags continuation.
    for (;;) {
      uint8_t group = static_cast<uint8_t>(delta & 0x7F);
      delta >>= 7;
      if (delta != 0) group |= 0x80;
      model.Encode(enc, group);
      if (delta == 0) break;
    }
  }
  return enc.Finish();
}

std::vector<std::array<uint32_t, 3>> DecodeLocations(
    std::span<const uint8_t> bytes, size_t count) {
  std::vector<std::array<uint32_t, 3>> coords(count);
  if (count == 0) return coords;
  RangeDecoder dec(bytes);
  AdaptiveByteModel model;
  uint64_t prev = 0;
  for (size_t i = 0; i < count; ++i) {
    uint64_t delta = 0;
    int shift = 0;
    for (;;) {
      uint8_t group = model.Decode(dec);
      delta |= static_cast<uint64_t>(group & 0x7F) << shift;
      shift += 7;
      if ((group & 0x80) == 0) break;
      if (shift > 63) Fail("corrupt location stream");
    }
    prev += delta;
    MortonDecode(prev, coords[i]);
  }
  return coords;
}

}  // namespace cgs
