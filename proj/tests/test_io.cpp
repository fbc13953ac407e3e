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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cgs/common.hpp"
#include "cgs/io/dataset.hpp"
#include "cgs/io/image_io.hpp"
#include "cgs/io/ply.hpp"
#include "cgs/io/toy.hpp"
#include "cgs/renderer/metrics.hpp"

using namespace cgs;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("cgs_io_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter_++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int counter_;
};
int TempDir::counter_ = 0;

ToyScene SmallToy(uint64_t seed = 7) {
  ToySceneSpec spec;
  spec.gaussian_count = 12;
  spec.camera_count = 16;
  spec.image_size = 32;
  spec.seed = seed;
  return MakeToyScene(spec);
}

}  // namespace

TEST_CASE("png save/load round trips 8-bit data") {
  TempDir dir;
  Rng rng(1);
  Image img(23, 17);
  for (float& v : img.rgb)
    v = static_cast<float>(rng.NextBelow(256)) / 255.0f;
  std::string p = (dir.path / "img.png").string();
  SavePng(img, p);
  Image back = LoadPng(p);
  REQUIRE(back.width == img.width);
  REQUIRE(back.height == img.height);
  for (size_t i = 0; i < img.rgb.size(); ++i) CHECK(back.rgb[i] == img.rgb[i]);
}

TEST_CASE("ply points round trip") {
  TempDir dir;
  Rng rng(2);
  std::vector<Vec3d> pts;
  for (int i = 0; i < 200; ++i)
    pts.push_back({rng.NextNormal(), rng.NextNormal(), rng.NextNormal()});
  std::string p = (dir.path / "points.ply").string();
  SavePlyPoints(pts, p);
  std::vector<Vec3d> back = LoadPlyPoints(p);
  REQUIRE(back.size() == pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    CHECK(back[i].x == doctest::Approx(pts[i].x).epsilon(1e-6));
    CHECK(back[i].z == doctest::Approx(pts[i].z).epsilon(1e-6));
  }
}

TEST_CASE("toy scene is deterministic under a fixed seed") {
  ToyScene a = SmallToy(7);
  ToyScene b = SmallToy(7);
  REQUIRE(a.ground_truth.size() == b.ground_truth.size());
  for (size_t i = 0; i < a.ground_truth.size(); ++i) {
    CHECK(a.ground_truth[i].location.x == b.ground_truth[i].location.x);
    CHECK(a.ground_truth[i].opacity == b.ground_truth[i].opacity);
  }
  for (size_t v = 0; v < a.dataset.images.size(); ++v)
    CHECK(a.dataset.images[v].rgb == b.dataset.images[v].rgb);

  ToyScene c = SmallToy(8);
  bool any_diff = false;
  for (size_t i = 0; i < a.ground_truth.size(); ++i)
    if (a.ground_truth[i].location.x != c.ground_truth[i].location.x)
      any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("toy cameras sit on a ring around the centroid") {
  ToyScene toy = SmallToy();
  Vec3d centroid{0, 0, 0};
  for (const Vec3d& p : toy.dataset.points) centroid = centroid + p;
  centroid = centroid * (1.0 / toy.dataset.points.size());
  std::vector<double> dists;
  for (const Camera& cam : toy.dataset.cameras)
    dists.push_back(Norm(cam.center() - centroid));
  for (double d : dists) CHECK(d == doctest::Approx(dists[0]).epsilon(1e-6));
}

TEST_CASE("toy targets reproduce from the ground truth bit-exactly") {
  ToyScene toy = SmallToy();
  for (size_t v = 0; v < toy.dataset.cameras.size(); ++v) {
    Image img =
        Render(toy.ground_truth, toy.dataset.cameras[v], {0, 0, 0});
    // Targets are stored at 8-bit precision.
    for (float& val : img.rgb) {
      float c = val < 0 ? 0.0f : (val > 1 ? 1.0f : val);
      val = static_cast<float>(std::lrint(c * 255.0f)) / 255.0f;
    }
    CHECK(img.rgb == toy.dataset.images[v].rgb);
  }
}

TEST_CASE("toy targets have usable content") {
  ToyScene toy = SmallToy();
  double mean = 0;
  for (const Image& img : toy.dataset.images)
    for (float v : img.rgb) mean += v;
  mean /= toy.dataset.images.size() * toy.dataset.images[0].rgb.size();
  CHECK(mean > 0.03);
  CHECK(mean < 0.95);
}

TEST_CASE("dataset directory save/load round trip with split") {
  TempDir dir;
  ToyScene toy = SmallToy();
  SaveDataset(toy.dataset, dir.path.string());
  Dataset ds = LoadDataset(dir.path.string());

  REQUIRE(ds.cameras.size() == 16);
  REQUIRE(ds.images.size() == 16);
  CHECK(ds.points.size() == toy.dataset.points.size());
  // 16 views -> test {0, 8}, 14 train.
  REQUIRE(ds.test_idx.size() == 2);
  CHECK(ds.test_idx[0] == 0);
  CHECK(ds.test_idx[1] == 8);
  CHECK(ds.train_idx.size() == 14);

  for (size_t v = 0; v < 16; ++v) {
    CHECK(ds.images[v].rgb == toy.dataset.images[v].rgb);
    CHECK(ds.cameras[v].focal.x == toy.dataset.cameras[v].focal.x);
    CHECK(ds.cameras[v].rotation.m == toy.dataset.cameras[v].rotation.m);
  }
}

TEST_CASE("missing files are reported by name") {
  TempDir dir;
  CHECK_THROWS_WITH_AS(LoadDataset(dir.path.string()),
                       doctest::Contains("cameras.json"), Error);

  // cameras.json exists but points.ply is missing.
  std::ofstream(dir.path / "cameras.json") << "[]";
  CHECK_THROWS_WITH_AS(LoadDataset(dir.path.string()),
                       doctest::Contains("points.ply"), Error);
}

TEST_CASE("image dimension mismatch against the camera is an error") {
  TempDir dir;
  ToyScene toy = SmallToy();
  SaveDataset(toy.dataset, dir.path.string());
  // Overwrite one image with the wrong size.
  Image wrong(8, 8);
  SavePng(wrong, (dir.path / "images" / "3.png").string());
  CHECK_THROWS_WITH_AS(LoadDataset(dir.path.string()),
                       doctest::Contains("3.png"), Error);
}

TEST_CASE("corrupt cameras.json is an error") {
  TempDir dir;
  ToyScene toy = SmallToy();
  SaveDataset(toy.dataset, dir.path.string());
  std::ofstream(dir.path / "cameras.json") << "{not json";
  CHECK_THROWS(LoadDataset(dir.path.string()));
}

TEST_CASE("non-orthonormal rotation is rejected") {
  TempDir dir;
  ToyScene toy = SmallToy();
  toy.dataset.cameras[1].rotation.m[0] = 2.0;
  SaveDataset(toy.dataset, dir.path.string());
  CHECK_THROWS_WITH_AS(LoadDataset(dir.path.string()),
                       doctest::Contains("orthonormal"), Error);
}

TEST_CASE("toy spec json parsing with defaults") {
  TempDir dir;
  std::string p = (dir.path / "spec.json").string();
  std::ofstream(p) << R"({"gaussian_count": 9, "seed": 42})";
  ToySceneSpec spec = ToySpecFromJson(p);
  CHECK(spec.gaussian_count == 9);
  CHECK(spec.seed == 42);
  CHECK(spec.camera_count == 8);   // default
  CHECK(spec.image_size == 64);    // default
}
