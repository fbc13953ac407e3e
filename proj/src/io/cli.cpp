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

#include "cgs/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cgs/common.hpp"
#include "cgs/core/scene_ops.hpp"
#include "cgs/io/dataset.hpp"
#include "cgs/io/image_io.hpp"
#include "cgs/io/ply.hpp"
#include "cgs/io/toy.hpp"
#include "cgs/train/trainer.hpp"

namespace cgs {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<uint8_t> ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail("cannot open " + path);
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in),
                              std::istreambuf_iterator<char>());
}

void WriteFileBytes(const std::string& path, std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

void WriteJson(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) Fail("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

struct TrainArgs {
  std::string scene_dir;
  std::string out_path;
  std::string resume_path;
  double lambda = 0.001;
  int steps = 2000;
  uint64_t seed = 0;
  int k = 10;
  double voxel_size = 0.0;  // 0 = 1e-2 of bbox diagonal
  int prune_interval = 600;
  double prune_threshold = 0.005;
};

void AddTrainFlags(CLI::App* cmd, TrainArgs& a) {
  cmd->add_option("--scene", a.scene_dir, "scene directory")->required();
  cmd->add_option("--lambda", a.lambda, "rate-distortion trade-off");
  cmd->add_option("--steps", a.steps, "optimization steps");
  cmd->add_option("--out", a.out_path, "output bitstream (.cgs)")->required();
  cmd->add_option("--seed", a.seed, "RNG seed");
  cmd->add_option("--k", a.k, "coupled primitives per anchor");
  cmd->add_option("--voxel-size", a.voxel_size,
                  "anchor voxel size (default: 1e-2 of bbox diagonal)");
  cmd->add_option("--prune-interval", a.prune_interval, "steps between prunes");
  cmd->add_option("--prune-threshold", a.prune_threshold,
                  "max-opacity prune threshold");
  cmd->add_option("--resume", a.resume_path, "optimizer-state sidecar to resume");
}

int RunTrain(const TrainArgs& a) {
  Dataset ds = LoadDataset(a.scene_dir);
  std::vector<Camera> cams;
  std::vector<Image> targets;
  for (size_t i : ds.train_idx) {
    cams.push_back(ds.cameras[i]);
    targets.push_back(ds.images[i]);
  }

  TrainConfig cfg;
  cfg.lambda = a.lambda;
  cfg.steps = a.steps;
  cfg.seed = a.seed;
  cfg.prune_interval = a.prune_interval;
  cfg.prune_threshold = a.prune_threshold;

  TrainState state;
  uint64_t step0 = 0;
  std::vector<TraceRow> trace;
  if (!a.resume_path.empty()) {
    auto [st, gs] = LoadCheckpoint(a.resume_path);
    state = std::move(st);
    step0 = gs;
    TrainSteps(state, cams, targets, cfg, step0, trace);
  } else {
    double voxel = a.voxel_size;
    if (voxel <= 0) {
      Vec3d lo = ds.points.at(0), hi = ds.points.at(0);
      for (const Vec3d& p : ds.points) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
      }
      double diag = Norm(hi - lo);
      voxel = diag > 0 ? diag * 1e-2 : 1e-2;
    }
    Scene scene = AttachCoupled(InitAnchors(ds.points, voxel, a.seed), a.k);
    state = InitTrainState(std::move(scene), cfg);
    TrainSteps(state, cams, targets, cfg, 0, trace);
  }

  std::vector<uint8_t> bytes = EncodeState(state, a.lambda);
  WriteFileBytes(a.out_path, bytes);
  SaveCheckpoint(state, step0 + static_cast<uint64_t>(a.steps),
                 a.out_path + ".state");

  {
    std::ofstream csv(a.out_path + ".trace.csv");
    csv << "step,L,D_bits,R_bits\n";
    for (size_t i = 0; i < trace.size(); ++i) {
      char line[160];
      std::snprintf(line, sizeof line, "%zu,%.9g,%.9g,%.9g\n",
                    static_cast<size_t>(step0) + i, trace[i].loss,
                    trace[i].distortion, trace[i].rate);
      csv << line;
    }
  }
  std::cout << "wrote " << a.out_path << " (" << bytes.size() << " bytes)\n";
  return 0;
}

json RateReportJson(const RateReport& r) {
  return json{{"bits_f", r.bits_f},
              {"bits_sigma", r.bits_sigma},
              {"bits_g", r.bits_g},
              {"bits_hyper", r.bits_hyper},
              {"bits_locations", r.bits_locations},
              {"total", r.total},
              {"per_anchor_avg", r.per_anchor_avg},
              {"per_coupled_avg", r.per_coupled_avg}};
}

int RunReport(const std::string& in_path, const std::string& json_path) {
  std::vector<uint8_t> bytes = ReadFileBytes(in_path);
  SectionSizes sz = ParseSections(bytes);
  CodecState st = ReadScene(bytes);

  size_t na = st.scene.anchor_count();
  size_t nc = st.scene.coupled_count();

  // Actual coded sizes, in bits.
  RateReport actual;
  actual.bits_locations = 8.0 * sz.section[kSecLocations];
  actual.bits_hyper_f = 8.0 * sz.section[kSecEtaF];
  actual.bits_f = 8.0 * sz.section[kSecF];
  actual.bits_sigma = 8.0 * sz.section[kSecSigma];
  actual.bits_hyper_g = 8.0 * sz.section[kSecEtaG];
  actual.bits_g = 8.0 * sz.section[kSecG];
  actual.bits_hyper = actual.bits_hyper_f + actual.bits_hyper_g;
  actual.total = actual.bits_f + actual.bits_sigma + actual.bits_g +
                 actual.bits_hyper + actual.bits_locations;
  actual.per_anchor_avg = (actual.bits_f + actual.bits_sigma +
                           actual.bits_hyper_f + actual.bits_locations) /
                          static_cast<double>(na);
  actual.per_coupled_avg =
      (actual.bits_g + actual.bits_hyper_g) / static_cast<double>(nc);

  RateReport estimated =
      SceneRate(st.scene, st.model, st.fb, st.q,
                8.0 * static_cast<double>(sz.section[kSecLocations]));

  json out;
  out["rate_report"] = RateReportJson(actual);
  out["estimated"] = RateReportJson(estimated);
  out["sections"] = {{"header_bytes", sz.header},
                     {"weights_bytes", sz.weights},
                     {"locations_bytes", sz.section[kSecLocations]},
                     {"eta_f_bytes", sz.section[kSecEtaF]},
                     {"f_bytes", sz.section[kSecF]},
                     {"sigma_bytes", sz.section[kSecSigma]},
                     {"eta_g_bytes", sz.section[kSecEtaG]},
                     {"g_bytes", sz.section[kSecG]}};
  out["file_bytes"] = bytes.size();
  out["file_bits"] = bytes.size() * 8;
  out["header"] = {{"anchor_count", na},
                   {"k", st.scene.coupled_per_anchor},
                   {"lambda", st.lambda},
                   {"s_sigma", st.q.s_sigma}};
  WriteJson(json_path, out);
  std::cout << "wrote " << json_path << "\n";
  return 0;
}

int RunEval(const std::string& in_path, const std::string& scene_dir,
            const std::string& json_path) {
  std::vector<uint8_t> bytes = ReadFileBytes(in_path);
  Dataset ds = LoadDataset(scene_dir);
  std::vector<Camera> cams;
  std::vector<Image> targets;
  for (size_t i : ds.test_idx) {
    cams.push_back(ds.cameras[i]);
    targets.push_back(ds.images[i]);
  }
  EvalReport rep = Evaluate(bytes, cams, targets);

  json views = json::array();
  for (size_t i = 0; i < rep.per_view.size(); ++i)
    views.push_back(json{{"view", ds.test_idx[i]},
                         {"psnr", rep.per_view[i].psnr},
                         {"ssim", rep.per_view[i].ssim}});
  json out = {{"size_bytes", rep.size_bytes},
              {"size_mb", static_cast<double>(rep.size_bytes) / (1024.0 * 1024.0)},
              {"mean_psnr", rep.mean_psnr},
              {"mean_ssim", rep.mean_ssim},
              {"per_view", views}};
  WriteJson(json_path, out);
  std::cout << "wrote " << json_path << "\n";
  return 0;
}

int RunDecode(const std::string& in_path, const std::string& out_dir,
              const std::string& scene_dir) {
  std::vector<uint8_t> bytes = ReadFileBytes(in_path);
  CodecState st = ReadScene(bytes);
  fs::create_directories(out_dir);

  // Attribute preview from a fixed canonical view: over the +x/+y/+z corner
  // looking at the anchor centroid.
  Vec3d centroid{0, 0, 0};
  for (const AnchorPrimitive& a : st.scene.anchors)
    centroid = centroid + a.location;
  centroid = centroid * (1.0 / static_cast<double>(st.scene.anchor_count()));
  Vec3d lo = st.scene.anchors[0].location, hi = lo;
  for (const AnchorPrimitive& a : st.scene.anchors) {
    lo = {std::min(lo.x, a.location.x), std::min(lo.y, a.location.y),
          std::min(lo.z, a.location.z)};
    hi = {std::max(hi.x, a.location.x), std::max(hi.y, a.location.y),
          std::max(hi.z, a.location.z)};
  }
  double diag = std::max(Norm(hi - lo), 1e-3);
  Camera canon;
  canon.width = 256;
  canon.height = 256;
  canon.focal = {256, 256};
  canon.principal_point = {128, 128};
  {
    Vec3d c = centroid + Vec3d{1, 1, 1} * (1.2 * diag);
    Vec3d fwd = (centroid - c) * (1.0 / Norm(centroid - c));
    Vec3d up{0, 0, 1};
    Vec3d right = {fwd.y * up.z - fwd.z * up.y, fwd.z * up.x - fwd.x * up.z,
                   fwd.x * up.y - fwd.y * up.x};
    right = right * (1.0 / Norm(right));
    Vec3d down = {fwd.y * right.z - fwd.z * right.y,
                  fwd.z * right.x - fwd.x * right.z,
                  fwd.x * right.y - fwd.y * right.x};
    canon.rotation.m = {right.x, right.y, right.z, down.x, down.y,
                        down.z,  fwd.x,   fwd.y,   fwd.z};
    Vec3d t = canon.rotation * c;
    canon.translation = {-t.x, -t.y, -t.z};
  }
  SavePlySplats(DecodeCoupled(st.scene, canon, st.nets),
                (fs::path(out_dir) / "splats.ply").string());

  if (!scene_dir.empty()) {
    Dataset ds = LoadDataset(scene_dir);
    for (size_t i = 0; i < ds.cameras.size(); ++i) {
      Image img = Render(DecodeCoupled(st.scene, ds.cameras[i], st.nets),
                         ds.cameras[i], {0, 0, 0});
      SavePng(img, (fs::path(out_dir) / ("render_" + std::to_string(i) + ".png"))
                       .string());
    }
  }
  std::cout << "decoded " << st.scene.anchor_count() << " anchors, "
            << st.scene.coupled_count() << " coupled primitives\n";
  return 0;
}

int RunRender(const std::string& in_path, const std::string& scene_dir,
              int camera_idx, const std::string& out_path,
              const std::vector<double>& bg) {
  std::vector<uint8_t> bytes = ReadFileBytes(in_path);
  CodecState st = ReadScene(bytes);
  Dataset ds = LoadDataset(scene_dir);
  if (camera_idx < 0 || static_cast<size_t>(camera_idx) >= ds.cameras.size())
    Fail("camera index out of range");
  Vec3d background{0, 0, 0};
  if (bg.size() == 3) background = {bg[0], bg[1], bg[2]};
  const Camera& cam = ds.cameras[camera_idx];
  Image img = Render(DecodeCoupled(st.scene, cam, st.nets), cam, background);
  SavePng(img, out_path);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int RunToy(const std::string& spec_path, const std::string& out_dir) {
  ToySceneSpec spec;
  if (!spec_path.empty()) spec = ToySpecFromJson(spec_path);
  ToyScene toy = MakeToyScene(spec);
  SaveDataset(toy.dataset, out_dir);
  std::cout << "wrote toy scene (" << toy.ground_truth.size() << " Gaussians, "
            << toy.dataset.cameras.size() << " cameras) to " << out_dir << "\n";
  return 0;
}

}  // namespace

int RunCli(int argc, char** argv) {
  CLI::App app{"cgs: rate-distortion optimized codec for Gaussian-splat scenes"};
  app.require_subcommand(1);

  TrainArgs train_args, encode_args;
  CLI::App* train_cmd = app.add_subcommand("train", "optimize and emit a bitstream");
  AddTrainFlags(train_cmd, train_args);
  CLI::App* encode_cmd =
      app.add_subcommand("encode", "alias of train");
  AddTrainFlags(encode_cmd, encode_args);

  std::string dec_in, dec_out, dec_scene;
  CLI::App* dec_cmd = app.add_subcommand("decode", "decode a bitstream");
  dec_cmd->add_option("--in", dec_in, "input .cgs")->required();
  dec_cmd->add_option("--out", dec_out, "output directory")->required();
  dec_cmd->add_option("--scene", dec_scene,
                      "scene directory providing cameras for per-view renders");

  std::string ren_in, ren_scene, ren_out;
  int ren_camera = 0;
  std::vector<double> ren_bg;
  CLI::App* ren_cmd = app.add_subcommand("render", "render one view");
  ren_cmd->add_option("--in", ren_in, "input .cgs")->required();
  ren_cmd->add_option("--scene", ren_scene, "scene directory (cameras)")
      ->required();
  ren_cmd->add_option("--camera", ren_camera, "camera index")->required();
  ren_cmd->add_option("--out", ren_out, "output PNG")->required();
  ren_cmd->add_option("--background", ren_bg, "background R G B")
      ->expected(3);

  std::string eval_in, eval_scene, eval_json;
  CLI::App* eval_cmd = app.add_subcommand("eval", "decode and score test views");
  eval_cmd->add_option("--in", eval_in, "input .cgs")->required();
  eval_cmd->add_option("--scene", eval_scene, "scene directory")->required();
  eval_cmd->add_option("--json", eval_json, "output JSON")->required();

  std::string rep_in, rep_json;
  CLI::App* rep_cmd =
      app.add_subcommand("report", "bitstream composition and rate report");
  rep_cmd->add_option("--in", rep_in, "input .cgs")->required();
  rep_cmd->add_option("--json", rep_json, "output JSON")->required();

  std::string toy_spec, toy_out;
  CLI::App* toy_cmd = app.add_subcommand("toy", "generate a synthetic scene");
  toy_cmd->add_option("--spec", toy_spec, "spec JSON (defaults when omitted)");
  toy_cmd->add_option("--out", toy_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*train_cmd) return RunTrain(train_args);
    if (*encode_cmd) return RunTrain(encode_args);
    if (*dec_cmd) return RunDecode(dec_in, dec_out, dec_scene);
    if (*ren_cmd) return RunRender(ren_in, ren_scene, ren_camera, ren_out, ren_bg);
    if (*eval_cmd) return RunEval(eval_in, eval_scene, eval_json);
    if (*rep_cmd) return RunReport(rep_in, rep_json);
    if (*toy_cmd) return RunToy(toy_spec, toy_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace cgs
