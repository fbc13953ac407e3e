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
#include <span>
#include <vector>

#include "cgs/coder/location_codec.hpp"
#include "cgs/core/types.hpp"
#include "cgs/entropy/models.hpp"
#include "cgs/prediction/predict.hpp"

namespace cgs {

inline constexpr uint8_t kBitstreamVersion = 1;

// Section order after the header: network weights | coded locations |
// coded eta_f | coded f | coded sigma | coded eta_g | coded g.
enum Section : int {
  kSecLocations = 0,
  kSecEtaF = 1,
  kSecF = 2,
  kSecSigma = 3,
  kSecEtaG = 4,
  kSecG = 5,
  kSectionCount = 6
};

// Everything a decoder holds: the quantized scene (in Morton order) plus the
// f32-precision networks and entropy models that travel in the bitstream.
struct CodecState {
  Scene scene;
  PredictionNetworks nets;
  GaussianCondModel model;
  FactorizedBottleneck fb;
  QuantConfig q;
  double lambda = 0.0;
  LocationGrid grid;
};

// Quantizes a trained state into its codable form: all network weights and
// the covariance step pass through f32, anchors are reordered along the
// Morton curve, and every coded tensor is replaced by its dequantized
// symbols. Renders of the result match the decoded bitstream bit-exactly.
CodecState QuantizeState(const Scene& scene, const PredictionNetworks& nets,
                         const GaussianCondModel& model,
                         const FactorizedBottleneck& fb, const QuantConfig& q,
                         double lambda, double location_step);

std::vector<uint8_t> WriteScene(const CodecState& state);

CodecState ReadScene(std::span<const uint8_t> bytes);

// Byte layout summary of an encoded stream, for rate reporting.
struct SectionSizes {
  size_t header = 0;
  size_t weights = 0;
  size_t section[kSectionCount] = {0, 0, 0, 0, 0, 0};
  size_t total = 0;
};
SectionSizes ParseSections(std::span<const uint8_t> bytes);

// Fixed traversal order of all network weights in the blob.
size_t WeightBlobCount(const PredictionNetworks& nets,
                       const GaussianCondModel& model);

}  // namespace cgs
