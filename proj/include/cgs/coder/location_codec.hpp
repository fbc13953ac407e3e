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

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "cgs/core/types.hpp"

namespace cgs {

inline constexpr int kLocationGridBits = 21;  // cells per axis <= 2^21

// Anchor locations quantized to a fixed-point grid. Origin and step are
// stored as f32 in the bitstream header, so they are held here with f32
// precision already applied.
struct LocationGrid {
  std::array<float, 3> origin;
  float step;
  std::vector<std::array<uint32_t, 3>> coords;

  Vec3d Dequantize(size_t i) const {
    return {static_cast<double>(origin[0]) +
                static_cast<double>(coords[i][0]) * static_cast<double>(step),
            static_cast<double>(origin[1]) +
                static_cast<double>(coords[i][1]) * static_cast<double>(step),
            static_cast<double>(origin[2]) +
                static_cast<double>(coords[i][2]) * static_cast<double>(step)};
  }
};

// Quantizes points onto a grid anchored at the bounding-box minimum
// (round-half-to-even). Errors with "grid overflow" past 2^21 cells per axis.
LocationGrid QuantizeLocations(const std::vector<Vec3d>& points, double step);

// Default grid step: 1e-3 of the bounding-box diagonal.
double DefaultLocationStep(const std::vector<Vec3d>& points);

// Interleaves three 21-bit coordinates into a 63-bit Morton key.
uint64_t MortonEncode(uint32_t x, uint32_t y, uint32_t z);

// Sort permutation by (Morton key, index). Applying it to the coords makes
// consecutive entries spatially coherent for delta coding.
std::vector<uint32_t> MortonOrder(const LocationGrid& grid);

// Range-codes Morton-sorted grid coordinates as key deltas under an adaptive
// byte model. The caller must pass coords already in Morton order; decode
// returns them in the same order.
std::vector<uint8_t> EncodeLocations(
    const std::vector<std::array<uint32_t, 3>>& sorted_coords);
std::vector<std::array<uint32_t, 3>> DecodeLocations(
    std::span<const uint8_t> bytes, size_t count);

}  // namespace cgs
