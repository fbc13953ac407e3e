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

#include "cgs/train/params.hpp"

#include <cmath>

#include "cgs/common.hpp"

namespace cgs {

ParamGroup& ParamStore::Add(const std::string& name, std::vector<double> init,
                            double lr_scale) {
  ParamGroup g;
  g.name = name;
  g.m.assign(init.size(), 0.0);
  g.v.assign(init.size(), 0.0);
  g.values = std::move(init);
  g.lr_scale = lr_scale;
  groups_.push_back(std::move(g));
  return groups_.back();
}

ParamGroup& ParamStore::Get(const std::string& name) {
  for (ParamGroup& g : groups_)
    if (g.name == name) return g;
  Fail("unknown parameter group " + name);
}

const ParamGroup& ParamStore::Get(const std::string& name) const {
  for (const ParamGroup& g : groups_)
    if (g.name == name) return g;
  Fail("unknown parameter group " + name);
}

void ParamStore::PushAll(Tape& tape) {
  for (ParamGroup& g : groups_) g.tape_base = tape.PushLeaves(g.values);
}

void ParamStore::AdamStep(const Tape& tape, double lr, double beta1,
                          double beta2, double eps) {
  ++adam_t_;
  double bc1 = 1.0 - std::pow(beta1, adam_t_);
  double bc2 = 1.0 - std::pow(beta2, adam_t_);
  for (ParamGroup& g : groups_) {
    Check(g.tape_base != Tape::kNone, "parameters were not pushed");
    double glr = lr * g.lr_scale;
    for (size_t i = 0; i < g.values.size(); ++i) {
      double grad = tape.grad(g.tape_base + static_cast<uint32_t>(i));
      if (!std::isfinite(grad))
        Fail("non-finite gradient in group " + g.name);
      g.m[i] = beta1 * g.m[i] + (1.0 - beta1) * grad;
      g.v[i] = beta2 * g.v[i] + (1.0 - beta2) * grad * grad;
      double mhat = g.m[i] / bc1;
      double vhat = g.v[i] / bc2;
      g.values[i] -= glr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

void ParamStore::FilterBlocks(ParamGroup& g, const std::vector<bool>& keep,
                              size_t stride) {
  Check(g.values.size() == keep.size() * stride, "filter size mismatch");
  size_t w = 0;
  for (size_t b = 0; b < keep.size(); ++b) {
    if (!keep[b]) continue;
    for (size_t i = 0; i < stride; ++i) {
      g.values[w * stride + i] = g.values[b * stride + i];
      g.m[w * stride + i] = g.m[b * stride + i];
      g.v[w * stride + i] = g.v[b * stride + i];
    }
    ++w;
  }
  g.values.resize(w * stride);
  g.m.resize(w * stride);
  g.v.resize(w * stride);
}

}  // namespace cgs
