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

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cgs/coder/bitstream.hpp"
#include "cgs/core/types.hpp"
#include "cgs/entropy/models.hpp"
#include "cgs/prediction/predict.hpp"
#include "cgs/renderer/renderer.hpp"
#include "cgs/train/params.hpp"

namespace cgs {

struct TrainConfig {
  double lambda = 0.001;
  int steps = 2000;
  double lr_init = 1e-2;
  double lr_final = 1e-4;     // cosine anneal to lr_init/100
  double lr_net_scale = 0.1;  // networks train 10x slower
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  uint64_t seed = 0;
  int prune_interval = 600;
  double prune_threshold = 0.005;
  // Squared-Mahalanobis support of splats in the training render. Pass a
  // huge value for exact (smooth) rendering in gradient checks.
  double support_cutoff = 18.0;
  double location_step = 0.0;     // 0 = 1e-3 of the bounding-box diagonal
  bool freeze_residuals = false;  // ablation: residual embeddings stay zero
  Vec3d background{0.0, 0.0, 0.0};
};

// Trainable state. The parameter store is the master during optimization;
// scene/nets/models are materialized views (SyncFromParams).
struct TrainState {
  Scene scene;
  PredictionNetworks nets;
  GaussianCondModel model;
  FactorizedBottleneck fb;
  QuantConfig q;
  ParamStore params;
  double location_step = 0.0;
};

TrainState InitTrainState(Scene scene, const TrainConfig& cfg);

void SyncFromParams(TrainState& state);

struct LossNodes {
  uint32_t loss, distortion, rate;
};

// Differentiable lambda*R + D for one training view, quantization noise
// everywhere (Eq.-7-style proxy). Pushes all parameters and records the full
// graph; per-anchor max predicted opacity is accumulated into `max_opacity`
// when given. Noise draws depend only on (seed, step), so re-evaluating the
// same step reproduces the same loss.
LossNodes BuildLossTape(Tape& tape, TrainState& state, const Camera& camera,
                        const Image& target, const TrainConfig& cfg,
                        uint64_t step, std::vector<double>* max_opacity);

struct EvalLossResult {
  double loss = 0, distortion = 0, rate = 0;
  RateReport report;
};

// Hard-quantization loss: the scene is quantized exactly as the encoder
// would, rate comes from the entropy models, distortion from the plain
// renderer averaged over the batch.
EvalLossResult EvalLoss(const TrainState& state, std::span<const Camera> cams,
                        std::span<const Image> targets, double lambda);

struct TraceRow {
  double loss, distortion, rate;
};

struct TrainResult {
  TrainState state;
  std::vector<TraceRow> trace;
};

// Rate-constrained optimization: `steps` Adam updates with cosine learning
// rate decay, round-robin over the training views, pruning every
// prune_interval steps. Deterministic for a fixed seed.
TrainResult Train(Scene scene, std::span<const Camera> train_cams,
                  std::span<const Image> train_targets,
                  const TrainConfig& cfg);

// Continues optimization of an existing state; `step_offset` keeps the noise
// stream and view rotation aligned across checkpoint boundaries.
void TrainSteps(TrainState& state, std::span<const Camera> train_cams,
                std::span<const Image> train_targets, const TrainConfig& cfg,
                uint64_t step_offset, std::vector<TraceRow>& trace);

// Optimizer-state sidecar next to the bitstream checkpoint.
void SaveCheckpoint(const TrainState& state, uint64_t global_step,
                    const std::string& path);
std::pair<TrainState, uint64_t> LoadCheckpoint(const std::string& path);

// Encodes the current state into a bitstream.
std::vector<uint8_t> EncodeState(const TrainState& state, double lambda);

struct EvalViewMetrics {
  double psnr = 0, ssim = 0;
};

struct EvalReport {
  std::vector<EvalViewMetrics> per_view;
  double mean_psnr = 0, mean_ssim = 0;
  size_t size_bytes = 0;
};

// Decodes a bitstream and scores renders against the given views.
EvalReport Evaluate(std::span<const uint8_t> bitstream,
                    std::span<const Camera> cams,
                    std::span<const Image> targets,
                    const Vec3d& background = {0, 0, 0});

// Every-8th-view split (indices 0, 8, 16, ... are test views).
void SplitViews(size_t view_count, std::vector<size_t>& train_idx,
                std::vector<size_t>& test_idx);

}  // namespace cgs
