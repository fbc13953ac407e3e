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

#include "cgs/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "cgs/core/scene_ops.hpp"
#include "cgs/renderer/diff_render.hpp"
#include "cgs/renderer/metrics.hpp"

namespace cgs {

namespace {

enum NoiseTag : uint32_t {
  kNoiseF = 1,
  kNoiseEtaF = 2,
  kNoiseSigma = 3,
  kNoiseG = 4,
  kNoiseEtaG = 5,
};

std::vector<double> FlattenAnchors(const Scene& s, int what) {
  std::vector<double> out;
  for (const AnchorPrimitive& a : s.anchors) {
    switch (what) {
      case 0:
        out.insert(out.end(), {a.location.x, a.location.y, a.location.z});
        break;
      case 1:
        out.insert(out.end(), {a.cov_scale.x, a.cov_scale.y, a.cov_scale.z});
        break;
      case 2:
        out.insert(out.end(), {a.cov_rotation.w, a.cov_rotation.x,
                               a.cov_rotation.y, a.cov_rotation.z});
        break;
      default:
        out.insert(out.end(), a.ref_embedding.begin(), a.ref_embedding.end());
    }
  }
  return out;
}

double LocationBits(const std::vector<double>& loc_values, double step) {
  std::vector<Vec3d> pts(loc_values.size() / 3);
  for (size_t i = 0; i < pts.size(); ++i)
    pts[i] = {loc_values[3 * i], loc_values[3 * i + 1], loc_values[3 * i + 2]};
  LocationGrid grid = QuantizeLocations(pts, step);
  std::vector<uint32_t> order = MortonOrder(grid);
  std::vector<std::array<uint32_t, 3>> sorted(grid.coords.size());
  for (size_t i = 0; i < order.size(); ++i) sorted[i] = grid.coords[order[i]];
  return 8.0 * static_cast<double>(EncodeLocations(sorted).size());
}

}  // namespace

void SplitViews(size_t view_count, std::vector<size_t>& train_idx,
                std::vector<size_t>& test_idx) {
  train_idx.clear();
  test_idx.clear();
  for (size_t i = 0; i < view_count; ++i) {
    if (i % 8 == 0)
      test_idx.push_back(i);
    else
      train_idx.push_back(i);
  }
}

TrainState InitTrainState(Scene scene, const TrainConfig& cfg) {
  TrainState st;
  st.scene = std::move(scene);
  st.nets.InitWeights(cfg.seed);
  st.model.InitWeights(cfg.seed + 1);
  st.q.s_sigma = 0.01;

  if (cfg.location_step > 0) {
    st.location_step = cfg.location_step;
  } else {
    std::vector<Vec3d> locs;
    for (const AnchorPrimitive& a : st.scene.anchors)
      locs.push_back(a.location);
    st.location_step = DefaultLocationStep(locs);
  }

  ParamStore& p = st.params;
  p.Add("anchor_loc", FlattenAnchors(st.scene, 0), 1.0);
  p.Add("anchor_scale", FlattenAnchors(st.scene, 1), 1.0);
  p.Add("anchor_rot", FlattenAnchors(st.scene, 2), 1.0);
  p.Add("anchor_f", FlattenAnchors(st.scene, 3), 1.0);
  {
    std::vector<double> g;
    for (const CoupledPrimitive& c : st.scene.coupled)
      g.insert(g.end(), c.res_embedding.begin(), c.res_embedding.end());
    p.Add("coupled_g", std::move(g), cfg.freeze_residuals ? 0.0 : 1.0);
  }
  p.Add("net_geo_t", st.nets.geo_translation.weights(), cfg.lr_net_scale);
  p.Add("net_geo_s", st.nets.geo_scale.weights(), cfg.lr_net_scale);
  p.Add("net_geo_r", st.nets.geo_rotation.weights(), cfg.lr_net_scale);
  p.Add("net_app_o", st.nets.app_opacity.weights(), cfg.lr_net_scale);
  p.Add("net_app_c", st.nets.app_color.weights(), cfg.lr_net_scale);
  p.Add("ent_hyper_f", st.model.hyper_f.weights(), cfg.lr_net_scale);
  p.Add("ent_hyper_g", st.model.hyper_g.weights(), cfg.lr_net_scale);
  p.Add("ent_param_f", st.model.param_f.weights(), cfg.lr_net_scale);
  p.Add("ent_param_sigma", st.model.param_sigma.weights(), cfg.lr_net_scale);
  p.Add("ent_param_g", st.model.param_g.weights(), cfg.lr_net_scale);
  p.Add("fb_logits", st.fb.logits(), cfg.lr_net_scale);
  p.Add("log_s_sigma", {std::log(st.q.s_sigma)}, cfg.lr_net_scale);
  return st;
}

void SyncFromParams(TrainState& st) {
  const std::vector<double>& loc = st.params.Get("anchor_loc").values;
  const std::vector<double>& scl = st.params.Get("anchor_scale").values;
  const std::vector<double>& rot = st.params.Get("anchor_rot").values;
  const std::vector<double>& emb = st.params.Get("anchor_f").values;
  size_t na = loc.size() / 3;
  st.scene.anchors.resize(na);
  for (size_t i = 0; i < na; ++i) {
    AnchorPrimitive& a = st.scene.anchors[i];
    a.location = {loc[3 * i], loc[3 * i + 1], loc[3 * i + 2]};
    a.cov_scale = {scl[3 * i], scl[3 * i + 1], scl[3 * i + 2]};
    a.cov_rotation = {rot[4 * i], rot[4 * i + 1], rot[4 * i + 2],
                      rot[4 * i + 3]};
    for (int j = 0; j < kRefEmbeddingDim; ++j)
      a.ref_embedding[j] = emb[kRefEmbeddingDim * i + j];
  }
  const std::vector<double>& g = st.params.Get("coupled_g").values;
  size_t nc = g.size() / kResEmbeddingDim;
  st.scene.coupled.resize(nc);
  int K = st.scene.coupled_per_anchor;
  for (size_t i = 0; i < nc; ++i) {
    CoupledPrimitive& c = st.scene.coupled[i];
    c.anchor_index = static_cast<uint32_t>(i / K);
    for (int j = 0; j < kResEmbeddingDim; ++j)
      c.res_embedding[j] = g[kResEmbeddingDim * i + j];
  }
  st.nets.geo_translation.weights() = st.params.Get("net_geo_t").values;
  st.nets.geo_scale.weights() = st.params.Get("net_geo_s").values;
  st.nets.geo_rotation.weights() = st.params.Get("net_geo_r").values;
  st.nets.app_opacity.weights() = st.params.Get("net_app_o").values;
  st.nets.app_color.weights() = st.params.Get("net_app_c").values;
  st.model.hyper_f.weights() = st.params.Get("ent_hyper_f").values;
  st.model.hyper_g.weights() = st.params.Get("ent_hyper_g").values;
  st.model.param_f.weights() = st.params.Get("ent_param_f").values;
  st.model.param_sigma.weights() = st.params.Get("ent_param_sigma").values;
  st.model.param_g.weights() = st.params.Get("ent_param_g").values;
  st.fb.logits() = st.params.Get("fb_logits").values;
  st.q.s_sigma = std::exp(st.params.Get("log_s_sigma").values[0]);
}

LossNodes BuildLossTape(Tape& tape, TrainState& st, const Camera& camera,
                        const Image& target, const TrainConfig& cfg,
                        uint64_t step, std::vector<double>* max_opacity) {
  Check(st.q.s_f == 1.0 && st.q.s_g == 1.0,
        "embedding steps are fixed to 1");
  ParamStore& p = st.params;
  p.PushAll(tape);

  uint32_t b_loc = p.Get("anchor_loc").tape_base;
  uint32_t b_scl = p.Get("anchor_scale").tape_base;
  uint32_t b_rot = p.Get("anchor_rot").tape_base;
  uint32_t b_f = p.Get("anchor_f").tape_base;
  uint32_t b_g = p.Get("coupled_g").tape_base;

  size_t na = p.Get("anchor_loc").values.size() / 3;
  int K = st.scene.coupled_per_anchor;

  Var s_sigma = exp(Var(tape, p.Get("log_s_sigma").tape_base));

  std::vector<std::vector<uint32_t>> fb_pmf(FactorizedBottleneck::kChannels);
  for (int c = 0; c < FactorizedBottleneck::kChannels; ++c)
    fb_pmf[c] = FbPmfTape(tape, p.Get("fb_logits").tape_base, c);

  uint64_t seed = cfg.seed;
  auto noise = [&](uint32_t tag, uint64_t idx) {
    return QuantNoise(seed, step, tag, idx);
  };

  Var rate_sum;
  bool rate_first = true;
  auto add_rate = [&](Var bits) {
    rate_sum = rate_first ? bits : rate_sum + bits;
    rate_first = false;
  };

  Vec3d cam_center = camera.center();
  std::vector<TapeGaussian> gaussians;
  gaussians.reserve(na * static_cast<size_t>(K));

  std::vector<uint32_t> f_tilde(kRefEmbeddingDim);
  std::vector<uint32_t> eta_ids(kHyperFDim);
  std::vector<uint32_t> g_tilde(kResEmbeddingDim);
  std::vector<uint32_t> ctx_ids(kRefEmbeddingDim + kHyperGDim);
  std::vector<uint32_t> h_ids(kPredictionFeatureDim);
  std::vector<uint32_t> app_ids(kViewEmbeddingDim + kPredictionFeatureDim);

  for (size_t i = 0; i < na; ++i) {
    // Noise-proxied embedding; with s_f = 1 the symbol-space and dequantized
    // values coincide.
    for (int j = 0; j < kRefEmbeddingDim; ++j) {
      Var ft = Var(tape, b_f + static_cast<uint32_t>(kRefEmbeddingDim * i + j)) +
               noise(kNoiseF, kRefEmbeddingDim * i + j);
      f_tilde[j] = ft.id;
    }

    // Hyperprior stream.
    uint32_t eta_base = st.model.hyper_f.ForwardTape(
        tape, p.Get("ent_hyper_f").tape_base, f_tilde);
    for (int c = 0; c < kHyperFDim; ++c) {
      Var et = Var(tape, eta_base + c) + noise(kNoiseEtaF, kHyperFDim * i + c);
      eta_ids[c] = et.id;
      add_rate(FbBitsTape(tape, fb_pmf[c], et));
    }

    // Embedding stream conditioned on the (noised) hyperpriors.
    uint32_t pf = st.model.param_f.ForwardTape(
        tape, p.Get("ent_param_f").tape_base, eta_ids);
    for (int j = 0; j < kRefEmbeddingDim; ++j) {
      Var rho = softplus(Var(tape, pf + kRefEmbeddingDim + j)) + 1e-4;
      add_rate(RateBitsTape(
          GaussianBinMassTape(Var(tape, f_tilde[j]), Var(tape, pf + j), rho)));
    }

    // Covariance stream: symbol-space proxy and its dequantized value.
    uint32_t ps = st.model.param_sigma.ForwardTape(
        tape, p.Get("ent_param_sigma").tape_base, f_tilde);
    Var cov_deq[kCovParamDim];
    for (int j = 0; j < kCovParamDim; ++j) {
      uint32_t raw = j < 3 ? b_scl + static_cast<uint32_t>(3 * i + j)
                           : b_rot + static_cast<uint32_t>(4 * i + (j - 3));
      Var tilde = Var(tape, raw) / s_sigma + noise(kNoiseSigma, kCovParamDim * i + j);
      cov_deq[j] = tilde * s_sigma;
      Var rho = softplus(Var(tape, ps + kCovParamDim + j)) + 1e-4;
      add_rate(RateBitsTape(GaussianBinMassTape(tilde, Var(tape, ps + j), rho)));
    }

    // View embedding from the raw anchor location.
    Var lx(tape, b_loc + static_cast<uint32_t>(3 * i));
    Var ly(tape, b_loc + static_cast<uint32_t>(3 * i + 1));
    Var lz(tape, b_loc + static_cast<uint32_t>(3 * i + 2));
    Var dx = lx - cam_center.x;
    Var dy = ly - cam_center.y;
    Var dz = lz - cam_center.z;
    Var dist = sqrt(dx * dx + dy * dy + dz * dz);
    Var inv_dist = 1.0 / dist;
    app_ids[0] = (dx * inv_dist).id;
    app_ids[1] = (dy * inv_dist).id;
    app_ids[2] = (dz * inv_dist).id;
    app_ids[3] = inv_dist.id;

    for (int j = 0; j < kRefEmbeddingDim; ++j) {
      h_ids[j] = f_tilde[j];
      ctx_ids[j] = f_tilde[j];
      app_ids[kViewEmbeddingDim + j] = f_tilde[j];
    }

    for (int k = 0; k < K; ++k) {
      size_t ci = i * static_cast<size_t>(K) + k;
      for (int j = 0; j < kResEmbeddingDim; ++j) {
        Var gt =
            Var(tape, b_g + static_cast<uint32_t>(kResEmbeddingDim * ci + j)) +
            noise(kNoiseG, kResEmbeddingDim * ci + j);
        g_tilde[j] = gt.id;
        h_ids[kRefEmbeddingDim + j] = gt.id;
        app_ids[kViewEmbeddingDim + kRefEmbeddingDim + j] = gt.id;
      }

      // Residual hyperprior + conditional rate.
      uint32_t etg_base = st.model.hyper_g.ForwardTape(
          tape, p.Get("ent_hyper_g").tape_base, g_tilde);
      for (int c = 0; c < kHyperGDim; ++c) {
        Var et = Var(tape, etg_base + c) + noise(kNoiseEtaG, kHyperGDim * ci + c);
        ctx_ids[kRefEmbeddingDim + c] = et.id;
        add_rate(FbBitsTape(tape, fb_pmf[kHyperFDim + c], et));
      }
      uint32_t pg = st.model.param_g.ForwardTape(
          tape, p.Get("ent_param_g").tape_base, ctx_ids);
      for (int j = 0; j < kResEmbeddingDim; ++j) {
        Var rho = softplus(Var(tape, pg + kResEmbeddingDim + j)) + 1e-4;
        add_rate(RateBitsTape(GaussianBinMassTape(Var(tape, g_tilde[j]),
                                                  Var(tape, pg + j), rho)));
      }

      // Inter-primitive prediction.
      uint32_t t_base = st.nets.geo_translation.ForwardTape(
          tape, p.Get("net_geo_t").tape_base, h_ids);
      uint32_t s_base = st.nets.geo_scale.ForwardTape(
          tape, p.Get("net_geo_s").tape_base, h_ids);
      uint32_t r_base = st.nets.geo_rotation.ForwardTape(
          tape, p.Get("net_geo_r").tape_base, h_ids);

      Vec3<Var> loc_k = {lx + Var(tape, t_base), ly + Var(tape, t_base + 1),
                         lz + Var(tape, t_base + 2)};
      Vec3<Var> cov_scale_k = {
          cov_deq[0] + log(exp(Var(tape, s_base))),
          cov_deq[1] + log(exp(Var(tape, s_base + 1))),
          cov_deq[2] + log(exp(Var(tape, s_base + 2)))};
      Quat<Var> pred_rot = QuatNormalize(Quat<Var>{Var(tape, r_base) + 1.0,
                                                   Var(tape, r_base + 1),
                                                   Var(tape, r_base + 2),
                                                   Var(tape, r_base + 3)});
      Quat<Var> rot_k = QuatNormalize(
          QuatMul(pred_rot, Quat<Var>{cov_deq[3], cov_deq[4], cov_deq[5],
                                      cov_deq[6]}));

      uint32_t o_base = st.nets.app_opacity.ForwardTape(
          tape, p.Get("net_app_o").tape_base, app_ids);
      uint32_t c_base = st.nets.app_color.ForwardTape(
          tape, p.Get("net_app_c").tape_base, app_ids);
      Var opac = sigmoid(Var(tape, o_base));
      Var col[3] = {sigmoid(Var(tape, c_base)), sigmoid(Var(tape, c_base + 1)),
                    sigmoid(Var(tape, c_base + 2))};

      Mat3<Var> cov3 = CovarianceFromParams(cov_scale_k, rot_k);

      TapeGaussian tg;
      tg.location[0] = loc_k.x.id;
      tg.location[1] = loc_k.y.id;
      tg.location[2] = loc_k.z.id;
      tg.cov[0] = cov3(0, 0).id;
      tg.cov[1] = cov3(0, 1).id;
      tg.cov[2] = cov3(0, 2).id;
      tg.cov[3] = cov3(1, 1).id;
      tg.cov[4] = cov3(1, 2).id;
      tg.cov[5] = cov3(2, 2).id;
      tg.opacity = opac.id;
      tg.color[0] = col[0].id;
      tg.color[1] = col[1].id;
      tg.color[2] = col[2].id;
      gaussians.push_back(tg);
    }
  }

  std::vector<double> alpha_stats;
  uint32_t img = RenderTape(tape, gaussians, camera, cfg.background,
                            cfg.support_cutoff,
                            max_opacity ? &alpha_stats : nullptr);
  if (max_opacity) {
    // Rendered visibility per anchor: the max composited alpha over the
    // anchor's coupled primitives.
    for (size_t ci = 0; ci < alpha_stats.size(); ++ci) {
      size_t anchor = ci / static_cast<size_t>(K);
      (*max_opacity)[anchor] =
          std::max((*max_opacity)[anchor], alpha_stats[ci]);
    }
  }
  Var d = DistortionTape(tape, img, target);

  double loc_bits = LocationBits(p.Get("anchor_loc").values, st.location_step);
  Var r_total = rate_sum + loc_bits;
  Var loss = cfg.lambda * r_total + d;
  return {loss.id, d.id, r_total.id};
}

EvalLossResult EvalLoss(const TrainState& st, std::span<const Camera> cams,
                        std::span<const Image> targets, double lambda) {
  Check(!cams.empty() && cams.size() == targets.size(), "empty batch");
  CodecState qs = QuantizeState(st.scene, st.nets, st.model, st.fb, st.q,
                                lambda, st.location_step);
  EvalLossResult r;
  double loc_bits =
      8.0 * static_cast<double>(EncodeLocations(qs.grid.coords).size());
  r.report = SceneRate(qs.scene, qs.model, qs.fb, qs.q, loc_bits);
  r.rate = r.report.total;
  for (size_t v = 0; v < cams.size(); ++v) {
    std::vector<RenderableGaussian> g = DecodeCoupled(qs.scene, cams[v], qs.nets);
    Image img = Render(g, cams[v], {0, 0, 0});
    r.distortion += Distortion(img, targets[v]);
  }
  r.distortion /= static_cast<double>(cams.size());
  r.loss = lambda * r.rate + r.distortion;
  return r;
}

void TrainSteps(TrainState& st, std::span<const Camera> train_cams,
                std::span<const Image> train_targets, const TrainConfig& cfg,
                uint64_t step_offset, std::vector<TraceRow>& trace) {
  Check(!train_cams.empty() && train_cams.size() == train_targets.size(),
        "no training views");
  Check(cfg.steps >= 0, "negative step count");

  Tape tape;
  std::vector<double> max_opacity(st.scene.anchor_count(), 0.0);

  for (int step = 0; step < cfg.steps; ++step) {
    uint64_t global_step = step_offset + static_cast<uint64_t>(step);
    size_t view = static_cast<size_t>(global_step % train_cams.size());

    tape.Reset();
    LossNodes nodes =
        BuildLossTape(tape, st, train_cams[view], train_targets[view], cfg,
                      global_step, &max_opacity);

    double L = tape.value(nodes.loss);
    if (!std::isfinite(L))
      Fail("training diverged at step " + std::to_string(step));
    trace.push_back(
        {L, tape.value(nodes.distortion), tape.value(nodes.rate)});

    tape.Backward(nodes.loss);

    double t = cfg.steps > 1 ? static_cast<double>(step) / (cfg.steps - 1) : 1.0;
    double lr = cfg.lr_final +
                0.5 * (cfg.lr_init - cfg.lr_final) * (1.0 + std::cos(M_PI * t));
    st.params.AdamStep(tape, lr, cfg.beta1, cfg.beta2, cfg.adam_eps);

    // Keep quaternions unit; the coded magnitudes stay near 1.
    {
      std::vector<double>& rot = st.params.Get("anchor_rot").values;
      for (size_t i = 0; i + 3 < rot.size(); i += 4) {
        double n = std::sqrt(rot[i] * rot[i] + rot[i + 1] * rot[i + 1] +
                             rot[i + 2] * rot[i + 2] + rot[i + 3] * rot[i + 3]);
        if (n > 1e-12)
          for (int j = 0; j < 4; ++j) rot[i + j] /= n;
      }
    }

    if (cfg.prune_interval > 0 && (step + 1) % cfg.prune_interval == 0 &&
        step + 1 < cfg.steps) {
      SyncFromParams(st);
      Scene pruned = PruneAnchors(st.scene, max_opacity, cfg.prune_threshold);
      if (pruned.anchor_count() != st.scene.anchor_count()) {
        std::vector<bool> keep(st.scene.anchor_count());
        for (size_t i = 0; i < keep.size(); ++i)
          keep[i] = max_opacity[i] >= cfg.prune_threshold;
        ParamStore::FilterBlocks(st.params.Get("anchor_loc"), keep, 3);
        ParamStore::FilterBlocks(st.params.Get("anchor_scale"), keep, 3);
        ParamStore::FilterBlocks(st.params.Get("anchor_rot"), keep, 4);
        ParamStore::FilterBlocks(st.params.Get("anchor_f"), keep,
                                 kRefEmbeddingDim);
        ParamStore::FilterBlocks(
            st.params.Get("coupled_g"), keep,
            static_cast<size_t>(kResEmbeddingDim) * st.scene.coupled_per_anchor);
        st.scene = std::move(pruned);
      }
      max_opacity.assign(st.scene.anchor_count(), 0.0);
    }
  }

  SyncFromParams(st);
}

TrainResult Train(Scene scene, std::span<const Camera> train_cams,
                  std::span<const Image> train_targets,
                  const TrainConfig& cfg) {
  TrainResult result;
  result.state = InitTrainState(std::move(scene), cfg);
  TrainSteps(result.state, train_cams, train_targets, cfg, 0, result.trace);
  return result;
}

std::vector<uint8_t> EncodeState(const TrainState& st, double lambda) {
  CodecState qs = QuantizeState(st.scene, st.nets, st.model, st.fb, st.q,
                                lambda, st.location_step);
  return WriteScene(qs);
}

void SaveCheckpoint(const TrainState& st, uint64_t global_step,
                    const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail("cannot open " + path + " for writing");
  auto u8 = [&](uint8_t v) { out.put(static_cast<char>(v)); };
  auto u32 = [&](uint32_t v) {
    for (int i = 0; i < 4; ++i) out.put(static_cast<char>(v >> (8 * i)));
  };
  auto u64 = [&](uint64_t v) {
    for (int i = 0; i < 8; ++i) out.put(static_cast<char>(v >> (8 * i)));
  };
  auto f64 = [&](double v) {
    uint64_t b;
    std::memcpy(&b, &v, 8);
    u64(b);
  };
  out.write("CGSS", 4);
  u8(1);
  u64(global_step);
  u32(static_cast<uint32_t>(st.params.step_count()));
  u8(static_cast<uint8_t>(st.scene.coupled_per_anchor));
  f64(st.location_step);
  u32(static_cast<uint32_t>(st.params.groups().size()));
  for (const ParamGroup& g : st.params.groups()) {
    u32(static_cast<uint32_t>(g.name.size()));
    out.write(g.name.data(), static_cast<std::streamsize>(g.name.size()));
    f64(g.lr_scale);
    u64(g.values.size());
    for (double v : g.values) f64(v);
    for (double v : g.m) f64(v);
    for (double v : g.v) f64(v);
  }
}

std::pair<TrainState, uint64_t> LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail("cannot open " + path);
  auto u8 = [&]() { return static_cast<uint8_t>(in.get()); };
  auto u32 = [&]() {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(u8()) << (8 * i);
    return v;
  };
  auto u64 = [&]() {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(u8()) << (8 * i);
    return v;
  };
  auto f64 = [&]() {
    uint64_t b = u64();
    double v;
    std::memcpy(&v, &b, 8);
    return v;
  };
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "CGSS", 4) != 0)
    Fail("not a checkpoint sidecar: " + path);
  if (u8() != 1) Fail("unsupported checkpoint version");

  TrainState st;
  uint64_t global_step = u64();
  int adam_t = static_cast<int>(u32());
  st.scene.coupled_per_anchor = u8();
  st.location_step = f64();
  uint32_t ngroups = u32();
  for (uint32_t gi = 0; gi < ngroups; ++gi) {
    uint32_t nlen = u32();
    std::string name(nlen, '\0');
    in.read(name.data(), nlen);
    double lr_scale = f64();
    uint64_t count = u64();
    std::vector<double> vals(count), m(count), v(count);
    for (double& x : vals) x = f64();
    for (double& x : m) x = f64();
    for (double& x : v) x = f64();
    if (!in) Fail("truncated checkpoint: " + path);
    ParamGroup& g = st.params.Add(name, std::move(vals), lr_scale);
    g.m = std::move(m);
    g.v = std::move(v);
  }
  st.params.set_step_count(adam_t);
  SyncFromParams(st);
  return {std::move(st), global_step};
}

EvalReport Evaluate(std::span<const uint8_t> bitstream,
                    std::span<const Camera> cams,
                    std::span<const Image> targets, const Vec3d& background) {
  Check(cams.size() == targets.size(), "camera/target count mismatch");
  CodecState st = ReadScene(bitstream);
  EvalReport rep;
  rep.size_bytes = bitstream.size();
  for (size_t v = 0; v < cams.size(); ++v) {
    std::vector<RenderableGaussian> g =
        DecodeCoupled(st.scene, cams[v], st.nets);
    Image img = Render(g, cams[v], background);
    EvalViewMetrics m;
    m.psnr = Psnr(img, targets[v]);
    m.ssim = Ssim(img, targets[v]);
    rep.per_view.push_back(m);
    rep.mean_psnr += m.psnr;
    rep.mean_ssim += m.ssim;
  }
  if (!rep.per_view.empty()) {
    rep.mean_psnr /= static_cast<double>(rep.per_view.size());
    rep.mean_ssim /= static_cast<double>(rep.per_view.size());
  }
  return rep;
}

}  // namespace cgs
