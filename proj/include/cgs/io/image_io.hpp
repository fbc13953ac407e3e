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

#include "cgs/renderer/renderer.hpp"

namespace cgs {

// 8-bit RGB PNG I/O. Loading maps [0,255] to [0,1]; saving rounds to the
// nearest 8-bit level after clamping.
Image LoadPng(const std::string& path);
void SavePng(const Image& img, const std::string& path);

}  // namespace cgs
