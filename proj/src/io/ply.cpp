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

#include "cgs/io/ply.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cgs/common.hpp"

namespace cgs {

namespace {

float ReadF32(std::istream& in) {
  uint8_t b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  uint32_t v = static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
               (static_cast<uint32_t>(b[2]) << 16) |
               (static_cast<uint32_t>(b[3]) << 24);
  return std::bit_cast<float>(v);
}

void WriteF32(std::ostream& out, float f) {
  uint32_t v = std::bit_cast<uint32_t>(f);
  uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                  static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

std::vector<Vec3d> LoadPlyPoints(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail("cannot open " + path);

  std::string line;
  std::getline(in, line);
  if (line != "ply") Fail("not a PLY file: " + path);

  size_t vertex_count = 0;
  bool binary_le = false;
  struct Prop {
    std::string type, name;
  };
  std::vector<Prop> props;
  bool in_vertex = false;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "format") {
      std::string fmt;
      ss >> fmt;
      binary_le = fmt == "binary_little_endian";
    } else if (tok == "element") {
      std::string name;
      ss >> name >> vertex_count;
      in_vertex = name == "vertex";
      if (!in_vertex && !props.empty()) break;
    } else if (tok == "property" && in_vertex) {
      Prop p;
      ss >> p.type >> p.name;
      props.push_back(p);
    } else if (tok == "end_header") {
      break;
    }
  }
  if (!binary_le) Fail("PLY must be binary little-endian: " + path);
  if (vertex_count == 0) Fail("no points");

  int xi = -1, yi = -1, zi = -1;
  for (size_t i = 0; i < props.size(); ++i) {
    if (props[i].type != "float" && props[i].type != "float32")
      Fail("unsupported PLY property type in " + path);
    if (props[i].name == "x") xi = static_cast<int>(i);
    if (props[i].name == "y") yi = static_cast<int>(i);
    if (props[i].name == "z") zi = static_cast<int>(i);
  }
  if (xi < 0 || yi < 0 || zi < 0) Fail("PLY missing x/y/z in " + path);

  std::vector<Vec3d> pts(vertex_count);
  std::vector<float> row(props.size());
  for (size_t i = 0; i < vertex_count; ++i) {
    for (float& f : row) f = ReadF32(in);
    if (!in) Fail("truncated PLY: " + path);
    pts[i] = {row[xi], row[yi], row[zi]};
  }
  return pts;
}

void SavePlyPoints(const std::vector<Vec3d>& points, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail("cannot open " + path + " for writing");
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << points.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "end_header\n";
  for (const Vec3d& p : points) {
    WriteF32(out, static_cast<float>(p.x));
    WriteF32(out, static_cast<float>(p.y));
    WriteF32(out, static_cast<float>(p.z));
  }
}

void SavePlySplats(const std::vector<RenderableGaussian>& splats,
                   const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail("cannot open " + path + " for writing");
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << splats.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "property float cov_xx\nproperty float cov_xy\nproperty float "
         "cov_xz\n"
      << "property float cov_yy\nproperty float cov_yz\nproperty float "
         "cov_zz\n"
      << "property float opacity\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      << "end_header\n";
  for (const RenderableGaussian& g : splats) {
    WriteF32(out, static_cast<float>(g.location.x));
    WriteF32(out, static_cast<float>(g.location.y));
    WriteF32(out, static_cast<float>(g.location.z));
    const Mat3d& c = g.covariance;
    WriteF32(out, static_cast<float>(c(0, 0)));
    WriteF32(out, static_cast<float>(c(0, 1)));
    WriteF32(out, static_cast<float>(c(0, 2)));
    WriteF32(out, static_cast<float>(c(1, 1)));
    WriteF32(out, static_cast<float>(c(1, 2)));
    WriteF32(out, static_cast<float>(c(2, 2)));
    WriteF32(out, static_cast<float>(g.opacity));
    auto q8 = [](double v) {
      double c255 = std::clamp(v, 0.0, 1.0) * 255.0;
      return static_cast<uint8_t>(c255 + 0.5);
    };
    uint8_t rgb[3] = {q8(g.color.x), q8(g.color.y), q8(g.color.z)};
    out.write(reinterpret_cast<const char*>(rgb), 3);
  }
}

}  // namespace cgs
