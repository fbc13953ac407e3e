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

#include <string>
#include <vector>

#include "cgs/autodiff/tape.hpp"

namespace cgs {

struct ParamGroup {
  std::string name;
  std::vector<double> values;
  std::vector<double> m, v;  // Adam moments
  double lr_scale = 1.0;
  uint32_t tape_base = Tape::kNone;
};

// Flat trainable state: groups are pushed onto the tape in a fixed order each
// step and updated from the tape's gradients with bias-corrected Adam.
class ParamStore {
 public:
  ParamGroup& Add(const std::string& name, std::vector<double> init,
                  double lr_scale);
  ParamGroup& Get(const std::string& name);
  const ParamGroup& Get(const std::string& name) const;
  std::vector<ParamGroup>& groups() { return groups_; }
  const std::vector<ParamGroup>& groups() const { return groups_; }

  void PushAll(Tape& tape);

  // One Adam step from the gradients of the last PushAll.
  void AdamStep(const Tape& tape, double lr, double beta1, double beta2,
                double eps);

  // Keeps per-anchor/per-coupled slices selected by `keep` (one flag per
  // block of `stride` scalars); moments are filtered alongside.
  static void FilterBlocks(ParamGroup& g, const std::vector<bool>& keep,
                           size_t stride);

  int step_count() const { return adam_t_; }
  void set_step_count(int t) { adam_t_ = t; }

 private:
  std::vector<ParamGroup> groups_;
  int adam_t_ = 0;
};

}  // namespace cgs
