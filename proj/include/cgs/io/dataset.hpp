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

#include "cgs/core/types.hpp"
#include "cgs/renderer/renderer.hpp"

namespace cgs {

// Scene directory contents: points.ply (binary LE float32 xyz), cameras.json
// and images/<id>.png named by camera index.
struct Dataset {
  std::vector<Camera> cameras;
  std::vector<Image> images;
  std::vector<Vec3d> points;
  std::vector<size_t> train_idx;
  std::vector<size_t> test_idx;  // every 8th view
};

Dataset LoadDataset(const std::string& dir);

// Writes a dataset directory in the ingestion layout.
void SaveDataset(const Dataset& ds, const std::string& dir);

}  // namespace cgs
