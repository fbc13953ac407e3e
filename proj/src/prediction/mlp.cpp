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

#include "cgs/prediction/mlp.hpp"

#include <cmath>

namespace cgs {

ResidualMlp::ResidualMlp(int in_dim, int out_dim, int hidden_dim)
    : in_dim_(in_dim), out_dim_(out_dim), hidden_dim_(hidden_dim) {
  size_t n = static_cast<size_t>(hidden_dim) * in_dim + hidden_dim +
             static_cast<size_t>(hidden_dim) * hidden_dim + hidden_dim +
             static_cast<size_t>(out_dim) * hidden_dim + out_dim;
  weights_.assign(n, 0.0);
}

void ResidualMlp::InitWeights(Rng& rng) {
  auto xavier = [&](size_t ofs, int rows, int cols) {
    double a = std::sqrt(6.0 / (rows + cols));
    for (size_t i = 0; i < static_cast<size_t>(rows) * cols; ++i)
      weights_[ofs + i] = rng.NextUniform(-a, a);
  };
  xavier(off_w_in(), hidden_dim_, in_dim_);
  xavier(off_w_mid(), hidden_dim_, hidden_dim_);
  // Output head and all biases stay zero.
}

void ResidualMlp::Forward(std::span<const double> x, std::span<double> y) const {
  Check(static_cast<int>(x.size()) == in_dim_, "mlp: input size mismatch");
  Check(static_cast<int>(y.size()) == out_dim_, "mlp: output size mismatch");
  std::vector<double> h0(hidden_dim_), h1(hidden_dim_);
  const double* w = weights_.data();
  for (int r = 0; r < hidden_dim_; ++r) {
    double acc = w[off_b_in() + r];
    const double* wr = w + off_w_in() + static_cast<size_t>(r) * in_dim_;
    for (int i = 0; i < in_dim_; ++i) acc += wr[i] * x[i];
    h0[r] = acc > 0 ? acc : 0.0;
  }
  for (int r = 0; r < hidden_dim_; ++r) {
    double acc = w[off_b_mid() + r];
    const double* wr = w + off_w_mid() + static_cast<size_t>(r) * hidden_dim_;
    for (int i = 0; i < hidden_dim_; ++i) acc += wr[i] * h0[i];
    h1[r] = h0[r] + (acc > 0 ? acc : 0.0);
  }
  for (int r = 0; r < out_dim_; ++r) {
    double acc = w[off_b_out() + r];
    const double* wr = w + off_w_out() + static_cast<size_t>(r) * hidden_dim_;
    for (int i = 0; i < hidden_dim_; ++i) acc += wr[i] * h1[i];
    y[r] = acc;
  }
}

uint32_t ResidualMlp::ForwardTape(Tape& tape, uint32_t w_base,
                                  std::span<const uint32_t> x_ids) const {
  uint32_t pre0 = tape.PushGemv(w_base + static_cast<uint32_t>(off_w_in()),
                                w_base + static_cast<uint32_t>(off_b_in()),
                                x_ids, hidden_dim_, in_dim_);
  std::vector<uint32_t> h0(hidden_dim_), h1(hidden_dim_);
  for (int i = 0; i < hidden_dim_; ++i) {
    Var v = relu(Var(tape, pre0 + i));
    h0[i] = v.id;
  }
  uint32_t pre1 = tape.PushGemv(w_base + static_cast<uint32_t>(off_w_mid()),
                                w_base + static_cast<uint32_t>(off_b_mid()),
                                h0, hidden_dim_, hidden_dim_);
  for (int i = 0; i < hidden_dim_; ++i) {
    Var v = Var(tape, h0[i]) + relu(Var(tape, pre1 + i));
    h1[i] = v.id;
  }
  return tape.PushGemv(w_base + static_cast<uint32_t>(off_w_out()),
                       w_base + static_cast<uint32_t>(off_b_out()), h1,
                       out_dim_, hidden_dim_);
}

}  // namespace cgs
