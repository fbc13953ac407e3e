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
#include "cgs/entropy/quant.hpp"
#include "cgs/prediction/mlp.hpp"

namespace cgs {

// Per-stream quantization steps. The embedding steps are fixed at 1; the
// covariance step is learnable (kept positive by optimizing its log).
struct QuantConfig {
  double s_f = 1.0;
  double s_g = 1.0;
  double s_sigma = 0.01;
};

inline constexpr int kHyperFDim = 8;
inline constexpr int kHyperGDim = 4;
inline constexpr int kFactorizedSupport = 64;  // symbols in [-64, 64]
inline constexpr int kFactorizedBins = 2 * kFactorizedSupport + 1;

// Learned per-channel categorical distributions over the integer support
// [-64, 64]; codes the two hyperprior streams. Channels 0..7 belong to
// eta_f, 8..11 to eta_g.
class FactorizedBottleneck {
 public:
  static constexpr int kChannels = kHyperFDim + kHyperGDim;

  FactorizedBottleneck();

  std::vector<double>& logits() { return logits_; }
  const std::vector<double>& logits() const { return logits_; }

  // Normalized pmf of one channel (softmax of its logits).
  std::vector<double> Pmf(int channel) const;

  // -log2 pmf[v]; errors with "support exceeded" when |v| > 64.
  double BitsOf(int channel, int32_t v) const;

  static int SymbolIndex(int32_t v) { return v + kFactorizedSupport; }

 private:
  std::vector<double> logits_;  // kChannels x kFactorizedBins
};

// Hyper-encoders and entropy-parameter networks for the conditional Gaussian
// models. rho outputs are mapped through softplus with a 1e-4 floor.
struct GaussianCondModel {
  ResidualMlp hyper_f{kRefEmbeddingDim, kHyperFDim};
  ResidualMlp hyper_g{kResEmbeddingDim, kHyperGDim};
  ResidualMlp param_f{kHyperFDim, 2 * kRefEmbeddingDim};
  ResidualMlp param_sigma{kRefEmbeddingDim, 2 * kCovParamDim};
  ResidualMlp param_g{kRefEmbeddingDim + kHyperGDim, 2 * kResEmbeddingDim};

  void InitWeights(uint64_t seed);
  size_t param_count() const;
};

inline double RhoFromRaw(double raw) {
  double sp = raw > 30.0 ? raw : std::log1p(std::exp(raw));
  return sp + 1e-4;
}

// Modeled symbols and rate estimates for one anchor. Decode order is
// eta_f -> f -> sigma; all conditioning uses quantized (dequantized-integer)
// values so encoder and decoder agree.
struct AnchorModelResult {
  std::vector<int32_t> sym_eta;    // kHyperFDim
  std::vector<int32_t> sym_f;      // kRefEmbeddingDim
  std::vector<int32_t> sym_sigma;  // kCovParamDim
  std::vector<double> f_deq;       // conditioning context for sigma and g
  std::vector<double> tau_f, rho_f;
  std::vector<double> tau_sigma, rho_sigma;
  double bits_f = 0, bits_sigma = 0, bits_hyper = 0;
};

struct CoupledModelResult {
  std::vector<int32_t> sym_eta;  // kHyperGDim
  std::vector<int32_t> sym_g;    // kResEmbeddingDim
  std::vector<double> tau_g, rho_g;
  double bits_g = 0, bits_hyper = 0;
};

AnchorModelResult ModelAnchor(const AnchorPrimitive& anchor,
                              const GaussianCondModel& model,
                              const FactorizedBottleneck& fb,
                              const QuantConfig& q);

CoupledModelResult ModelCoupled(const CoupledPrimitive& coupled,
                                const std::vector<double>& f_deq_anchor,
                                const GaussianCondModel& model,
                                const FactorizedBottleneck& fb,
                                const QuantConfig& q);

// The 7 coded covariance scalars of an anchor: log-scales then quaternion.
std::array<double, kCovParamDim> CovParamsOf(const AnchorPrimitive& a);

struct RateReport {
  double bits_f = 0;
  double bits_sigma = 0;
  double bits_g = 0;
  double bits_hyper = 0;
  double bits_locations = 0;
  double total = 0;
  double per_anchor_avg = 0;
  double per_coupled_avg = 0;
  // Split of bits_hyper used for the per-primitive averages.
  double bits_hyper_f = 0;
  double bits_hyper_g = 0;
};

// Estimated rate of the whole scene under hard quantization. Location bits
// come from the location codec and are passed in.
RateReport SceneRate(const Scene& scene, const GaussianCondModel& model,
                     const FactorizedBottleneck& fb, const QuantConfig& q,
                     double location_bits);

// Tape-side factorized bottleneck: softmax over one channel's logit range
// (pushed at logits_base, kFactorizedBins per channel).
std::vector<uint32_t> FbPmfTape(Tape& tape, uint32_t logits_base, int channel);

// -log2 of the pmf linearly interpolated at the continuous (noise-proxied)
// position x; matches the discrete pmf exactly at integers.
Var FbBitsTape(Tape& tape, std::span<const uint32_t> pmf_ids, Var x);

}  // namespace cgs
