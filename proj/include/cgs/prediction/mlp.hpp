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

#include "cgs/autodiff/tape.hpp"
#include "cgs/common.hpp"

namespace cgs {

// Two-layer residual perceptron with one identity-skip block:
//   h0 = relu(W_in x + b_in)
//   h1 = h0 + relu(W_mid h0 + b_mid)
//   y  = W_out h1 + b_out
// Weights live in one flat buffer so the whole network can be pushed onto a
// tape or serialized as a single block.
class ResidualMlp {
 public:
  ResidualMlp() = default;
  ResidualMlp(int in_dim, int out_dim, int hidden_dim = 32);

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  int hidden_dim() const { return hidden_dim_; }
  size_t param_count() const { return weights_.size(); }

  std::vector<double>& weights() { return weights_; }
  const std::vector<double>& weights() const { return weights_; }

  // Xavier-uniform inner layers, zero biases, zero output head. A zero head
  // makes the network output exactly zero at initialization.
  void InitWeights(Rng& rng);

  void Forward(std::span<const double> x, std::span<double> y) const;

  // Tape forward. `w_base` must point at a contiguous copy of weights() that
  // was pushed as leaves. Returns the base id of out_dim contiguous outputs.
  uint32_t ForwardTape(Tape& tape, uint32_t w_base,
                       std::span<const uint32_t> x_ids) const;

  // Offsets into the flat weight buffer.
  size_t off_w_in() const { return 0; }
  size_t off_b_in() const { return static_cast<size_t>(hidden_dim_) * in_dim_; }
  size_t off_w_mid() const { return off_b_in() + hidden_dim_; }
  size_t off_b_mid() const {
    return off_w_mid() + static_cast<size_t>(hidden_dim_) * hidden_dim_;
  }
  size_t off_w_out() const { return off_b_mid() + hidden_dim_; }
  size_t off_b_out() const {
    return off_w_out() + static_cast<size_t>(out_dim_) * hidden_dim_;
  }

 private:
  int in_dim_ = 0;
  int out_dim_ = 0;
  int hidden_dim_ = 0;
  std::vector<double> weights_;
};

}  // namespace cgs
