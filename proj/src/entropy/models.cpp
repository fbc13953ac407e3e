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

#include "cgs/entropy/models.hpp"

#include <algorithm>
#include <cmath>

#include "cgs/common.hpp"

namespace cgs {

FactorizedBottleneck::FactorizedBottleneck() {
  logits_.resize(static_cast<size_t>(kChannels) * kFactorizedBins);
  // Peaked two-sided geometric prior; training reshapes it.
  for (int c = 0; c < kChannels; ++c)
    for (int v = -kFactorizedSupport; v <= kFactorizedSupport; ++v)
      logits_[static_cast<size_t>(c) * kFactorizedBins + SymbolIndex(v)] =
          -0.3 * std::fabs(static_cast<double>(v));
}

std::vector<double> FactorizedBottleneck::Pmf(int channel) const {
  const double* l = &logits_[static_cast<size_t>(channel) * kFactorizedBins];
  double mx = l[0];
  for (int i = 1; i < kFactorizedBins; ++i) mx = std::max(mx, l[i]);
  std::vector<double> p(kFactorizedBins);
  double sum = 0.0;
  for (int i = 0; i < kFactorizedBins; ++i) {
    p[i] = std::exp(l[i] - mx);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

double FactorizedBottleneck::BitsOf(int channel, int32_t v) const {
  if (v < -kFactorizedSupport || v > kFactorizedSupport)
    Fail("support exceeded");
  std::vector<double> p = Pmf(channel);
  return RateBits(std::max(p[SymbolIndex(v)], kPmfFloor));
}

void GaussianCondModel::InitWeights(uint64_t seed) {
  Rng rng(SplitMix64(seed ^ 0xE17097B3ull));
  hyper_f.InitWeights(rng);
  hyper_g.InitWeights(rng);
  param_f.InitWeights(rng);
  param_sigma.InitWeights(rng);
  param_g.InitWeights(rng);

  // Start the predicted spreads wide enough that every stream's symbols lie
  // inside the live-gradient region of the discretized Gaussian. Embedding
  // symbols start near zero (rho ~ 1), but covariance symbols start at
  // magnitude |value| / s_sigma ~ O(100); with the default rho ~ 0.7 their
  // probability would hit the coding floor and all rate gradients would
  // vanish.
  auto set_rho_bias = [](ResidualMlp& mlp, double rho) {
    // softplus(b) + 1e-4 = rho
    double b = rho > 30.0 ? rho : std::log(std::expm1(rho - 1e-4));
    int half = mlp.out_dim() / 2;
    for (int j = 0; j < half; ++j)
      mlp.weights()[mlp.off_b_out() + half + j] = b;
  };
  set_rho_bias(param_f, 1.0);
  set_rho_bias(param_g, 1.0);
  set_rho_bias(param_sigma, 200.0);
}

size_t GaussianCondModel::param_count() const {
  return hyper_f.param_count() + hyper_g.param_count() +
         param_f.param_count() + param_sigma.param_count() +
         param_g.param_count();
}

std::array<double, kCovParamDim> CovParamsOf(const AnchorPrimitive& a) {
  return {a.cov_scale.x,    a.cov_scale.y,    a.cov_scale.z,
          a.cov_rotation.w, a.cov_rotation.x, a.cov_rotation.y,
          a.cov_rotation.z};
}

AnchorModelResult ModelAnchor(const AnchorPrimitive& anchor,
                              const GaussianCondModel& model,
                              const FactorizedBottleneck& fb,
                              const QuantConfig& q) {
  AnchorModelResult r;

  // Quantize the embedding first; the hyper-encoder consumes the dequantized
  // values so that re-modeling a decoded anchor reproduces the exact same
  // hyperpriors and probabilities.
  r.sym_f.resize(kRefEmbeddingDim);
  r.f_deq.resize(kRefEmbeddingDim);
  for (int i = 0; i < kRefEmbeddingDim; ++i) {
    r.sym_f[i] = Quantize(anchor.ref_embedding[i], q.s_f);
    r.f_deq[i] = Dequantize(r.sym_f[i], q.s_f);
  }

  std::vector<double> eta_cont(kHyperFDim);
  model.hyper_f.Forward(r.f_deq, eta_cont);
  r.sym_eta.resize(kHyperFDim);
  std::vector<double> eta_deq(kHyperFDim);
  for (int i = 0; i < kHyperFDim; ++i) {
    r.sym_eta[i] = Quantize(eta_cont[i], 1.0);
    eta_deq[i] = Dequantize(r.sym_eta[i], 1.0);
    r.bits_hyper += fb.BitsOf(i, r.sym_eta[i]);
  }

  // Embedding stream conditioned on decoded hyperpriors.
  std::vector<double> pf(2 * kRefEmbeddingDim);
  model.param_f.Forward(eta_deq, pf);
  r.tau_f.assign(pf.begin(), pf.begin() + kRefEmbeddingDim);
  r.rho_f.resize(kRefEmbeddingDim);
  for (int i = 0; i < kRefEmbeddingDim; ++i) {
    r.rho_f[i] = RhoFromRaw(pf[kRefEmbeddingDim + i]);
    r.bits_f += RateBits(GaussianBinMass(r.sym_f[i], r.tau_f[i], r.rho_f[i]));
  }

  // Covariance stream conditioned on the decoded embedding.
  std::vector<double> ps(2 * kCovParamDim);
  model.param_sigma.Forward(r.f_deq, ps);
  r.tau_sigma.assign(ps.begin(), ps.begin() + kCovParamDim);
  r.rho_sigma.resize(kCovParamDim);
  for (int i = 0; i < kCovParamDim; ++i)
    r.rho_sigma[i] = RhoFromRaw(ps[kCovParamDim + i]);

  std::array<double, kCovParamDim> cov = CovParamsOf(anchor);
  r.sym_sigma.resize(kCovParamDim);
  for (int i = 0; i < kCovParamDim; ++i) {
    r.sym_sigma[i] = Quantize(cov[i], q.s_sigma);
    r.bits_sigma +=
        RateBits(GaussianBinMass(r.sym_sigma[i], r.tau_sigma[i], r.rho_sigma[i]));
  }
  return r;
}

CoupledModelResult ModelCoupled(const CoupledPrimitive& coupled,
                                const std::vector<double>& f_deq_anchor,
                                const GaussianCondModel& model,
                                const FactorizedBottleneck& fb,
                                const QuantConfig& q) {
  Check(f_deq_anchor.size() == kRefEmbeddingDim,
        "anchor context must be modeled first");
  CoupledModelResult r;

  r.sym_g.resize(kResEmbeddingDim);
  std::vector<double> g_deq(kResEmbeddingDim);
  for (int i = 0; i < kResEmbeddingDim; ++i) {
    r.sym_g[i] = Quantize(coupled.res_embedding[i], q.s_g);
    g_deq[i] = Dequantize(r.sym_g[i], q.s_g);
  }

  std::vector<double> eta_cont(kHyperGDim);
  model.hyper_g.Forward(g_deq, eta_cont);
  r.sym_eta.resize(kHyperGDim);
  std::vector<double> ctx(kRefEmbeddingDim + kHyperGDim);
  for (int i = 0; i < kRefEmbeddingDim; ++i) ctx[i] = f_deq_anchor[i];
  for (int i = 0; i < kHyperGDim; ++i) {
    r.sym_eta[i] = Quantize(eta_cont[i], 1.0);
    ctx[kRefEmbeddingDim + i] = Dequantize(r.sym_eta[i], 1.0);
    r.bits_hyper += fb.BitsOf(kHyperFDim + i, r.sym_eta[i]);
  }

  std::vector<double> pg(2 * kResEmbeddingDim);
  model.param_g.Forward(ctx, pg);
  r.tau_g.assign(pg.begin(), pg.begin() + kResEmbeddingDim);
  r.rho_g.resize(kResEmbeddingDim);
  for (int i = 0; i < kResEmbeddingDim; ++i) {
    r.rho_g[i] = RhoFromRaw(pg[kResEmbeddingDim + i]);
    r.bits_g += RateBits(GaussianBinMass(r.sym_g[i], r.tau_g[i], r.rho_g[i]));
  }
  return r;
}

std::vector<uint32_t> FbPmfTape(Tape& tape, uint32_t logits_base,
                                int channel) {
  uint32_t base = logits_base + static_cast<uint32_t>(channel) * kFactorizedBins;
  // Shift by the max logit (a record-time constant) for stability; this does
  // not change the softmax or its gradients.
  double mx = tape.value(base);
  for (int i = 1; i < kFactorizedBins; ++i)
    mx = std::max(mx, tape.value(base + i));
  std::vector<uint32_t> e(kFactorizedBins);
  Var sum;
  for (int i = 0; i < kFactorizedBins; ++i) {
    Var v = exp(Var(tape, base + i) - mx);
    e[i] = v.id;
    sum = i == 0 ? v : sum + v;
  }
  std::vector<uint32_t> pmf(kFactorizedBins);
  for (int i = 0; i < kFactorizedBins; ++i)
    pmf[i] = (Var(tape, e[i]) / sum).id;
  return pmf;
}

Var FbBitsTape(Tape& tape, std::span<const uint32_t> pmf_ids, Var x) {
  double xv = x.val();
  int v0 = static_cast<int>(std::floor(xv));
  if (v0 < -kFactorizedSupport) v0 = -kFactorizedSupport;
  if (v0 > kFactorizedSupport - 1) v0 = kFactorizedSupport - 1;
  int i0 = FactorizedBottleneck::SymbolIndex(v0);
  Var p0(tape, pmf_ids[i0]);
  Var p1(tape, pmf_ids[i0 + 1]);
  Var t = x - static_cast<double>(v0);
  // Clamp the interpolation weight so out-of-support queries pin to the edge.
  t = vmax(vmin(t, 1.0), 0.0);
  Var p = p0 + t * (p1 - p0);
  return RateBitsTape(vmax(p, kPmfFloor));
}

RateReport SceneRate(const Scene& scene, const GaussianCondModel& model,
                     const FactorizedBottleneck& fb, const QuantConfig& q,
                     double location_bits) {
  RateReport rep;
  rep.bits_locations = location_bits;
  for (size_t i = 0; i < scene.anchors.size(); ++i) {
    AnchorModelResult ar = ModelAnchor(scene.anchors[i], model, fb, q);
    rep.bits_f += ar.bits_f;
    rep.bits_sigma += ar.bits_sigma;
    rep.bits_hyper_f += ar.bits_hyper;
    for (int k = 0; k < scene.coupled_per_anchor; ++k) {
      const CoupledPrimitive& c =
          scene.coupled[i * scene.coupled_per_anchor + k];
      CoupledModelResult cr = ModelCoupled(c, ar.f_deq, model, fb, q);
      rep.bits_g += cr.bits_g;
      rep.bits_hyper_g += cr.bits_hyper;
    }
  }
  rep.bits_hyper = rep.bits_hyper_f + rep.bits_hyper_g;
  rep.total = rep.bits_f + rep.bits_sigma + rep.bits_g + rep.bits_hyper +
              rep.bits_locations;
  size_t na = scene.anchor_count();
  size_t nc = scene.coupled_count();
  if (na > 0)
    rep.per_anchor_avg =
        (rep.bits_f + rep.bits_sigma + rep.bits_hyper_f + rep.bits_locations) /
        static_cast<double>(na);
  if (nc > 0)
    rep.per_coupled_avg =
        (rep.bits_g + rep.bits_hyper_g) / static_cast<double>(nc);
  return rep;
}

}  // namespace cgs
