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

#include "cgs/io/dataset.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "cgs/common.hpp"
#include "cgs/io/image_io.hpp"
#include "cgs/io/ply.hpp"
#include "cgs/train/trainer.hpp"

namespace cgs {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void CheckOrthonormal(const Mat3d& r, const std::string& where) {
  Mat3d rt = r.transposed();
  Mat3d id = r * rt;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double want = i == j ? 1.0 : 0.0;
      if (std::fabs(id(i, j) - want) > 1e-6)
        Fail("camera rotation not orthonormal in " + where);
    }
}

}  // namespace

Dataset LoadDataset(const std::string& dir) {
  fs::path root(dir);
  fs::path cam_path = root / "cameras.json";
  fs::path ply_path = root / "points.ply";
  if (!fs::exists(cam_path)) Fail("missing file: " + cam_path.string());
  if (!fs::exists(ply_path)) Fail("missing file: " + ply_path.string());

  Dataset ds;
  ds.points = LoadPlyPoints(ply_path.string());

  json cams;
  {
    std::ifstream in(cam_path);
    try {
      in >> cams;
    } catch (const json::exception& e) {
      Fail("corrupt cameras.json: " + std::string(e.what()));
    }
  }
  if (!cams.is_array() || cams.empty())
    Fail("cameras.json must be a non-empty array");

  for (size_t i = 0; i < cams.size(); ++i) {
    const json& c = cams[i];
    Camera cam;
    const auto& r = c.at("rotation");
    if (!r.is_array() || r.size() != 9)
      Fail("camera rotation must have 9 entries");
    for (int j = 0; j < 9; ++j) cam.rotation.m[j] = r[j].get<double>();
    const auto& t = c.at("translation");
    if (!t.is_array() || t.size() != 3)
      Fail("camera translation must have 3 entries");
    cam.translation = {t[0].get<double>(), t[1].get<double>(),
                       t[2].get<double>()};
    cam.focal = {c.at("fx").get<double>(), c.at("fy").get<double>()};
    cam.principal_point = {c.at("cx").get<double>(), c.at("cy").get<double>()};
    cam.width = c.at("width").get<int>();
    cam.height = c.at("height").get<int>();
    if (!(cam.focal.x > 0 && cam.focal.y > 0)) Fail("camera focal must be positive");
    CheckOrthonormal(cam.rotation, "camera " + std::to_string(i));

    fs::path img_path = root / "images" / (std::to_string(i) + ".png");
    if (!fs::exists(img_path)) Fail("missing file: " + img_path.string());
    Image img = LoadPng(img_path.string());
    if (img.width != cam.width || img.height != cam.height)
      Fail("image size does not match camera resolution: " +
           img_path.string());
    ds.cameras.push_back(cam);
    ds.images.push_back(std::move(img));
  }

  SplitViews(ds.cameras.size(), ds.train_idx, ds.test_idx);
  return ds;
}

void SaveDataset(const Dataset& ds, const std::string& dir) {
  fs::path root(dir);
  fs::create_directories(root / "images");
  SavePlyPoints(ds.points, (root / "points.ply").string());

  json cams = json::array();
  for (const Camera& c : ds.cameras) {
    json e;
    e["rotation"] = c.rotation.m;
    e["translation"] = {c.translation.x, c.translation.y, c.translation.z};
    e["fx"] = c.focal.x;
    e["fy"] = c.focal.y;
    e["cx"] = c.principal_point.x;
    e["cy"] = c.principal_point.y;
    e["width"] = c.width;
    e["height"] = c.height;
    cams.push_back(e);
  }
  {
    std::ofstream out(root / "cameras.json");
    out << cams.dump(2) << "\n";
  }
  for (size_t i = 0; i < ds.images.size(); ++i)
    SavePng(ds.images[i],
            (root / "images" / (std::to_string(i) + ".png")).string());
}

}  // namespace cgs
