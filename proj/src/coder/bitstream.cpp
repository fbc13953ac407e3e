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

#include "cgs/coder/bitstream.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "cgs/coder/range_coder.hpp"
#include "cgs/common.hpp"

namespace cgs {

namespace {

constexpr char kMagic[4] = {'C', 'G', 'S', '1'};
// magic + version + K + anchor_count + lambda + s_sigma + origin(3) + step +
// weights_len + 3x(min,max) supports + 6 section lengths + crc32
constexpr size_t kHeaderSize = 4 + 1 + 1 + 4 + 4 + 4 + 12 + 4 + 4 + 24 + 24 + 4;
constexpr size_t kCrcOffset = kHeaderSize - 4;

class ByteWriter {
 public:
  explicit ByteWriter(std::vector<uint8_t>& out) : out_(out) {}
  void U8(uint8_t v) { out_.push_back(v); }
  void U32(uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void I32(int32_t v) { U32(static_cast<uint32_t>(v)); }
  void F32(float v) { U32(std::bit_cast<uint32_t>(v)); }
  void Bytes(std::span<const uint8_t> b) {
    out_.insert(out_.end(), b.begin(), b.end());
  }

 private:
  std::vector<uint8_t>& out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> b) : b_(b) {}
  uint8_t U8() {
    Need(1);
    return b_[pos_++];
  }
  uint32_t U32() {
    Need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b_[pos_++]) << (8 * i);
    return v;
  }
  int32_t I32() { return static_cast<int32_t>(U32()); }
  float F32() { return std::bit_cast<float>(U32()); }
  std::span<const uint8_t> Bytes(size_t n) {
    Need(n);
    auto s = b_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  size_t pos() const { return pos_; }
  size_t remaining() const { return b_.size() - pos_; }

 private:
  void Need(size_t n) {
    if (pos_ + n > b_.size()) Fail("unexpected end of bitstream");
  }
  std::span<const uint8_t> b_;
  size_t pos_ = 0;
};

// The volatile hop blocks an SLP miscompilation (gcc 11, -O3) that fuses
// adjacent casts into one raw 16-byte store, dropping the f32 rounding.
double F32Cast(double v) {
  volatile float f = static_cast<float>(v);
  return static_cast<double>(f);
}

void CastMlpF32(ResidualMlp& mlp) {
  for (double& w : mlp.weights()) w = F32Cast(w);
}

void CastModelsF32(PredictionNetworks& nets, GaussianCondModel& model,
                   FactorizedBottleneck& fb) {
  CastMlpF32(nets.geo_translation);
  CastMlpF32(nets.geo_scale);
  CastMlpF32(nets.geo_rotation);
  CastMlpF32(nets.app_opacity);
  CastMlpF32(nets.app_color);
  CastMlpF32(model.hyper_f);
  CastMlpF32(model.hyper_g);
  CastMlpF32(model.param_f);
  CastMlpF32(model.param_sigma);
  CastMlpF32(model.param_g);
  for (double& w : fb.logits()) w = F32Cast(w);
}

void ForEachWeight(PredictionNetworks& nets, GaussianCondModel& model,
                   FactorizedBottleneck& fb, auto&& fn) {
  for (ResidualMlp* m :
       {&nets.geo_translation, &nets.geo_scale, &nets.geo_rotation,
        &nets.app_opacity, &nets.app_color, &model.hyper_f, &model.hyper_g,
        &model.param_f, &model.param_sigma, &model.param_g})
    for (double& w : m->weights()) fn(w);
  for (double& w : fb.logits()) fn(w);
}

uint32_t Crc32Of(std::span<const uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<uint32_t>(crc);
}

// Gaussian-conditional section coding: a shared integer support with a
// per-symbol discretized-Gaussian CDF.
void EncodeGaussianSymbol(RangeEncoder& enc, int32_t sym, double tau,
                          double rho, int32_t lo, int32_t hi) {
  std::vector<double> pmf(static_cast<size_t>(hi - lo + 1));
  for (int32_t v = lo; v <= hi; ++v)
    pmf[static_cast<size_t>(v - lo)] = GaussianBinMass(v, tau, rho);
  QuantizedCdf cdf = QuantizedCdf::FromPmf(pmf);
  cdf.EncodeSymbol(enc, static_cast<size_t>(sym - lo));
}

int32_t DecodeGaussianSymbol(RangeDecoder& dec, double tau, double rho,
                             int32_t lo, int32_t hi) {
  std::vector<double> pmf(static_cast<size_t>(hi - lo + 1));
  for (int32_t v = lo; v <= hi; ++v)
    pmf[static_cast<size_t>(v - lo)] = GaussianBinMass(v, tau, rho);
  QuantizedCdf cdf = QuantizedCdf::FromPmf(pmf);
  return lo + static_cast<int32_t>(cdf.DecodeSymbol(dec));
}

}  // namespace

size_t WeightBlobCount(const PredictionNetworks& nets,
                       const GaussianCondModel& model) {
  return nets.param_count() + model.param_count() +
         static_cast<size_t>(FactorizedBottleneck::kChannels) *
             kFactorizedBins;
}

CodecState QuantizeState(const Scene& scene, const PredictionNetworks& nets,
                         const GaussianCondModel& model,
                         const FactorizedBottleneck& fb, const QuantConfig& q,
                         double lambda, double location_step) {
  Check(!scene.anchors.empty(), "empty scene");
  CodecState st;
  st.nets = nets;
  st.model = model;
  st.fb = fb;
  CastModelsF32(st.nets, st.model, st.fb);
  st.q = q;
  st.q.s_sigma = F32Cast(q.s_sigma);
  st.lambda = F32Cast(lambda);

  // Grid + Morton reorder.
  std::vector<Vec3d> locs(scene.anchors.size());
  for (size_t i = 0; i < locs.size(); ++i) locs[i] = scene.anchors[i].location;
  LocationGrid grid = QuantizeLocations(locs, location_step);
  std::vector<uint32_t> order = MortonOrder(grid);

  st.grid.origin = grid.origin;
  st.grid.step = grid.step;
  st.grid.coords.resize(grid.coords.size());
  st.scene.coupled_per_anchor = scene.coupled_per_anchor;
  st.scene.anchors.resize(scene.anchors.size());
  st.scene.coupled.resize(scene.coupled.size());

  int K = scene.coupled_per_anchor;
  for (size_t ni = 0; ni < order.size(); ++ni) {
    uint32_t oi = order[ni];
    st.grid.coords[ni] = grid.coords[oi];

    const AnchorPrimitive& src = scene.anchors[oi];
    AnchorModelResult ar = ModelAnchor(src, st.model, st.fb, st.q);

    AnchorPrimitive& dst = st.scene.anchors[ni];
    dst.location = st.grid.Dequantize(ni);
    for (int j = 0; j < kRefEmbeddingDim; ++j)
      dst.ref_embedding[j] = ar.f_deq[j];
    // The quaternion is stored as raw dequantized values; covariance
    // reconstruction normalizes it. Renormalizing here would break the
    // idempotence of re-quantizing the decoded anchor.
    dst.cov_scale = {Dequantize(ar.sym_sigma[0], st.q.s_sigma),
                     Dequantize(ar.sym_sigma[1], st.q.s_sigma),
                     Dequantize(ar.sym_sigma[2], st.q.s_sigma)};
    dst.cov_rotation = {Dequantize(ar.sym_sigma[3], st.q.s_sigma),
                        Dequantize(ar.sym_sigma[4], st.q.s_sigma),
                        Dequantize(ar.sym_sigma[5], st.q.s_sigma),
                        Dequantize(ar.sym_sigma[6], st.q.s_sigma)};

    for (int k = 0; k < K; ++k) {
      const CoupledPrimitive& cs = scene.coupled[static_cast<size_t>(oi) * K + k];
      CoupledPrimitive& cd = st.scene.coupled[ni * K + k];
      cd.anchor_index = static_cast<uint32_t>(ni);
      for (int j = 0; j < kResEmbeddingDim; ++j)
        cd.res_embedding[j] =
            Dequantize(Quantize(cs.res_embedding[j], st.q.s_g), st.q.s_g);
    }
  }
  return st;
}

std::vector<uint8_t> WriteScene(const CodecState& state) {
  const Scene& scene = state.scene;
  size_t na = scene.anchor_count();
  Check(na > 0 && na <= std::numeric_limits<uint32_t>::max(), "bad scene");
  Check(scene.coupled_per_anchor >= 1 && scene.coupled_per_anchor <= 255,
        "K out of range");
  Check(state.grid.coords.size() == na, "grid does not match scene");

  // Model every primitive; collect symbols and coding parameters.
  std::vector<AnchorModelResult> anchors(na);
  std::vector<CoupledModelResult> coupled(scene.coupled_count());
  int32_t f_lo = 0, f_hi = 0, s_lo = 0, s_hi = 0, g_lo = 0, g_hi = 0;
  for (size_t i = 0; i < na; ++i) {
    anchors[i] = ModelAnchor(scene.anchors[i], state.model, state.fb, state.q);
    for (int32_t v : anchors[i].sym_f) {
      f_lo = std::min(f_lo, v);
      f_hi = std::max(f_hi, v);
    }
    for (int32_t v : anchors[i].sym_sigma) {
      s_lo = std::min(s_lo, v);
      s_hi = std::max(s_hi, v);
    }
    for (int k = 0; k < scene.coupled_per_anchor; ++k) {
      size_t ci = i * scene.coupled_per_anchor + k;
      coupled[ci] = ModelCoupled(scene.coupled[ci], anchors[i].f_deq,
                                 state.model, state.fb, state.q);
      for (int32_t v : coupled[ci].sym_g) {
        g_lo = std::min(g_lo, v);
        g_hi = std::max(g_hi, v);
      }
    }
  }

  // Section payloads.
  std::vector<uint8_t> sec[kSectionCount];
  sec[kSecLocations] = EncodeLocations(state.grid.coords);

  {
    RangeEncoder enc;
    std::vector<QuantizedCdf> cdfs;
    for (int c = 0; c < kHyperFDim; ++c)
      cdfs.push_back(QuantizedCdf::FromPmf(state.fb.Pmf(c)));
    for (size_t i = 0; i < na; ++i)
      for (int c = 0; c < kHyperFDim; ++c) {
        int32_t v = anchors[i].sym_eta[c];
        if (v < -kFactorizedSupport || v > kFactorizedSupport)
          Fail("support exceeded");
        cdfs[c].EncodeSymbol(enc,
                             static_cast<size_t>(v + kFactorizedSupport));
      }
    sec[kSecEtaF] = enc.Finish();
  }
  {
    RangeEncoder enc;
    for (size_t i = 0; i < na; ++i)
      for (int j = 0; j < kRefEmbeddingDim; ++j)
        EncodeGaussianSymbol(enc, anchors[i].sym_f[j], anchors[i].tau_f[j],
                             anchors[i].rho_f[j], f_lo, f_hi);
    sec[kSecF] = enc.Finish();
  }
  {
    RangeEncoder enc;
    for (size_t i = 0; i < na; ++i)
      for (int j = 0; j < kCovParamDim; ++j)
        EncodeGaussianSymbol(enc, anchors[i].sym_sigma[j],
                             anchors[i].tau_sigma[j], anchors[i].rho_sigma[j],
                             s_lo, s_hi);
    sec[kSecSigma] = enc.Finish();
  }
  {
    RangeEncoder enc;
    std::vector<QuantizedCdf> cdfs;
    for (int c = 0; c < kHyperGDim; ++c)
      cdfs.push_back(QuantizedCdf::FromPmf(state.fb.Pmf(kHyperFDim + c)));
    for (const CoupledModelResult& cr : coupled)
      for (int c = 0; c < kHyperGDim; ++c) {
        int32_t v = cr.sym_eta[c];
        if (v < -kFactorizedSupport || v > kFactorizedSupport)
          Fail("support exceeded");
        cdfs[c].EncodeSymbol(enc,
                             static_cast<size_t>(v + kFactorizedSupport));
      }
    sec[kSecEtaG] = enc.Finish();
  }
  {
    RangeEncoder enc;
    for (const CoupledModelResult& cr : coupled)
      for (int j = 0; j < kResEmbeddingDim; ++j)
        EncodeGaussianSymbol(enc, cr.sym_g[j], cr.tau_g[j], cr.rho_g[j], g_lo,
                             g_hi);
    sec[kSecG] = enc.Finish();
  }

  // Weight blob, f32 little-endian, fixed traversal order.
  std::vector<uint8_t> weights;
  {
    ByteWriter w(weights);
    auto nets = state.nets;
    auto model = state.model;
    auto fb = state.fb;
    ForEachWeight(nets, model, fb,
                  [&](double& v) { w.F32(static_cast<float>(v)); });
  }

  std::vector<uint8_t> out;
  out.reserve(kHeaderSize + weights.size() + sec[0].size() + sec[1].size() +
              sec[2].size() + sec[3].size() + sec[4].size() + sec[5].size());
  ByteWriter w(out);
  w.Bytes(std::span<const uint8_t>(
      reinterpret_cast<const uint8_t*>(kMagic), 4));
  w.U8(kBitstreamVersion);
  w.U8(static_cast<uint8_t>(scene.coupled_per_anchor));
  w.U32(static_cast<uint32_t>(na));
  w.F32(static_cast<float>(state.lambda));
  w.F32(static_cast<float>(state.q.s_sigma));
  for (int a = 0; a < 3; ++a) w.F32(state.grid.origin[a]);
  w.F32(state.grid.step);
  w.U32(static_cast<uint32_t>(weights.size()));
  w.I32(f_lo);
  w.I32(f_hi);
  w.I32(s_lo);
  w.I32(s_hi);
  w.I32(g_lo);
  w.I32(g_hi);
  for (int s = 0; s < kSectionCount; ++s)
    w.U32(static_cast<uint32_t>(sec[s].size()));
  w.U32(0);  // crc placeholder
  Check(out.size() == kHeaderSize, "header layout drift");
  w.Bytes(weights);
  for (int s = 0; s < kSectionCount; ++s) w.Bytes(sec[s]);

  uint32_t crc = Crc32Of(out);
  std::memcpy(out.data() + kCrcOffset, &crc, 4);
  return out;
}

CodecState ReadScene(std::span<const uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) Fail("unexpected end of bitstream");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) Fail("bad magic");

  // Verify the whole-file checksum with the crc field zeroed.
  {
    std::vector<uint8_t> copy(bytes.begin(), bytes.end());
    uint32_t stored;
    std::memcpy(&stored, copy.data() + kCrcOffset, 4);
    std::memset(copy.data() + kCrcOffset, 0, 4);
    if (Crc32Of(copy) != stored) Fail("checksum mismatch");
  }

  ByteReader r(bytes);
  r.Bytes(4);  // magic
  uint8_t version = r.U8();
  if (version != kBitstreamVersion) Fail("unsupported version");
  int K = r.U8();
  uint32_t na = r.U32();
  if (na == 0 || K == 0) Fail("bad header counts");
  float lambda = r.F32();
  float s_sigma = r.F32();

  CodecState st;
  st.lambda = lambda;
  st.q.s_sigma = s_sigma;
  for (int a = 0; a < 3; ++a) st.grid.origin[a] = r.F32();
  st.grid.step = r.F32();
  uint32_t weights_len = r.U32();
  int32_t f_lo = r.I32(), f_hi = r.I32();
  int32_t s_lo = r.I32(), s_hi = r.I32();
  int32_t g_lo = r.I32(), g_hi = r.I32();
  if (f_lo > f_hi || s_lo > s_hi || g_lo > g_hi) Fail("bad symbol support");
  uint32_t sec_len[kSectionCount];
  for (int s = 0; s < kSectionCount; ++s) sec_len[s] = r.U32();
  r.U32();  // crc, already checked

  size_t expect = kHeaderSize + weights_len;
  for (int s = 0; s < kSectionCount; ++s) expect += sec_len[s];
  if (expect != bytes.size()) Fail("section length mismatch");

  // Weights.
  if (weights_len != WeightBlobCount(st.nets, st.model) * 4)
    Fail("section length mismatch");
  {
    ByteReader wr(r.Bytes(weights_len));
    ForEachWeight(st.nets, st.model, st.fb,
                  [&](double& v) { v = static_cast<double>(wr.F32()); });
  }

  std::span<const uint8_t> sec[kSectionCount];
  for (int s = 0; s < kSectionCount; ++s) sec[s] = r.Bytes(sec_len[s]);

  st.grid.coords = DecodeLocations(sec[kSecLocations], na);

  st.scene.coupled_per_anchor = K;
  st.scene.anchors.resize(na);
  st.scene.coupled.resize(static_cast<size_t>(na) * K);

  // eta_f section.
  std::vector<std::array<int32_t, kHyperFDim>> eta_f(na);
  {
    RangeDecoder dec(sec[kSecEtaF]);
    std::vector<QuantizedCdf> cdfs;
    for (int c = 0; c < kHyperFDim; ++c)
      cdfs.push_back(QuantizedCdf::FromPmf(st.fb.Pmf(c)));
    for (uint32_t i = 0; i < na; ++i)
      for (int c = 0; c < kHyperFDim; ++c)
        eta_f[i][c] = static_cast<int32_t>(cdfs[c].DecodeSymbol(dec)) -
                      kFactorizedSupport;
  }

  // f section, conditioned on eta_f.
  {
    RangeDecoder dec(sec[kSecF]);
    for (uint32_t i = 0; i < na; ++i) {
      std::vector<double> eta_deq(kHyperFDim);
      for (int c = 0; c < kHyperFDim; ++c)
        eta_deq[c] = Dequantize(eta_f[i][c], 1.0);
      std::vector<double> pf(2 * kRefEmbeddingDim);
      st.model.param_f.Forward(eta_deq, pf);
      AnchorPrimitive& a = st.scene.anchors[i];
      a.location = st.grid.Dequantize(i);
      for (int j = 0; j < kRefEmbeddingDim; ++j) {
        double rho = RhoFromRaw(pf[kRefEmbeddingDim + j]);
        int32_t sym = DecodeGaussianSymbol(dec, pf[j], rho, f_lo, f_hi);
        a.ref_embedding[j] = Dequantize(sym, st.q.s_f);
      }
    }
  }

  // sigma section, conditioned on decoded f.
  {
    RangeDecoder dec(sec[kSecSigma]);
    for (uint32_t i = 0; i < na; ++i) {
      AnchorPrimitive& a = st.scene.anchors[i];
      std::vector<double> f_deq(a.ref_embedding.begin(),
                                a.ref_embedding.end());
      std::vector<double> ps(2 * kCovParamDim);
      st.model.param_sigma.Forward(f_deq, ps);
      double cov[kCovParamDim];
      for (int j = 0; j < kCovParamDim; ++j) {
        double rho = RhoFromRaw(ps[kCovParamDim + j]);
        int32_t sym = DecodeGaussianSymbol(dec, ps[j], rho, s_lo, s_hi);
        cov[j] = Dequantize(sym, st.q.s_sigma);
      }
      a.cov_scale = {cov[0], cov[1], cov[2]};
      a.cov_rotation = {cov[3], cov[4], cov[5], cov[6]};
    }
  }

  // eta_g section.
  std::vector<std::array<int32_t, kHyperGDim>> eta_g(st.scene.coupled.size());
  {
    RangeDecoder dec(sec[kSecEtaG]);
    std::vector<QuantizedCdf> cdfs;
    for (int c = 0; c < kHyperGDim; ++c)
      cdfs.push_back(QuantizedCdf::FromPmf(st.fb.Pmf(kHyperFDim + c)));
    for (size_t i = 0; i < eta_g.size(); ++i)
      for (int c = 0; c < kHyperGDim; ++c)
        eta_g[i][c] = static_cast<int32_t>(cdfs[c].DecodeSymbol(dec)) -
                      kFactorizedSupport;
  }

  // g section, conditioned on the owner anchor's f and eta_g.
  {
    RangeDecoder dec(sec[kSecG]);
    for (uint32_t i = 0; i < na; ++i) {
      const AnchorPrimitive& a = st.scene.anchors[i];
      std::vector<double> ctx(kRefEmbeddingDim + kHyperGDim);
      for (int j = 0; j < kRefEmbeddingDim; ++j) ctx[j] = a.ref_embedding[j];
      for (int k = 0; k < K; ++k) {
        size_t ci = static_cast<size_t>(i) * K + k;
        CoupledPrimitive& c = st.scene.coupled[ci];
        c.anchor_index = i;
        for (int j = 0; j < kHyperGDim; ++j)
          ctx[kRefEmbeddingDim + j] = Dequantize(eta_g[ci][j], 1.0);
        std::vector<double> pg(2 * kResEmbeddingDim);
        st.model.param_g.Forward(ctx, pg);
        for (int j = 0; j < kResEmbeddingDim; ++j) {
          double rho = RhoFromRaw(pg[kResEmbeddingDim + j]);
          int32_t sym = DecodeGaussianSymbol(dec, pg[j], rho, g_lo, g_hi);
          c.res_embedding[j] = Dequantize(sym, st.q.s_g);
        }
      }
    }
  }
  return st;
}

SectionSizes ParseSections(std::span<const uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) Fail("unexpected end of bitstream");
  ByteReader r(bytes);
  r.Bytes(4 + 1 + 1 + 4 + 4 + 4 + 12 + 4);
  SectionSizes sz;
  sz.header = kHeaderSize;
  sz.weights = r.U32();
  r.Bytes(24);
  sz.total = kHeaderSize + sz.weights;
  for (int s = 0; s < kSectionCount; ++s) {
    sz.section[s] = r.U32();
    sz.total += sz.section[s];
  }
  if (sz.total != bytes.size()) Fail("section length mismatch");
  return sz;
}

}  // namespace cgs
