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

#include "cgs/autodiff/tape.hpp"

#include <algorithm>
#include <cstring>

namespace cgs {

uint32_t Tape::PushGemv(uint32_t w_base, uint32_t b_base,
                        std::span<const uint32_t> in_ids, int rows, int cols) {
  Check(static_cast<int>(in_ids.size()) == cols, "gemv: input size mismatch");
  uint32_t in_ofs = static_cast<uint32_t>(idx_arena_.size());
  idx_arena_.insert(idx_arena_.end(), in_ids.begin(), in_ids.end());
  uint32_t out_base = AllocRange(static_cast<size_t>(rows));

  scratch_.resize(static_cast<size_t>(cols));
  for (int i = 0; i < cols; ++i) scratch_[i] = values_[in_ids[i]];
  const double* w = &values_[w_base];
  for (int r = 0; r < rows; ++r) {
    double acc = values_[b_base + r];
    const double* wr = w + static_cast<size_t>(r) * cols;
    for (int i = 0; i < cols; ++i) acc += wr[i] * scratch_[i];
    values_[out_base + r] = acc;
  }

  gemv_ops_.push_back({w_base, b_base, in_ofs, out_base, rows, cols});
  PushSentinel(kGemv, static_cast<uint32_t>(gemv_ops_.size() - 1));
  return out_base;
}

void Tape::BackwardGemv(const GemvOp& op) {
  const uint32_t* in = &idx_arena_[op.in_ofs];
  const double* w = &values_[op.w_base];
  scratch_.resize(static_cast<size_t>(op.cols) * 2);
  double* x = scratch_.data();
  double* gx = scratch_.data() + op.cols;
  for (int i = 0; i < op.cols; ++i) {
    x[i] = values_[in[i]];
    gx[i] = 0.0;
  }
  for (int r = 0; r < op.rows; ++r) {
    double g = grads_[op.out_base + r];
    if (g == 0.0) continue;
    grads_[op.b_base + r] += g;
    const double* wr = w + static_cast<size_t>(r) * op.cols;
    double* gwr = &grads_[op.w_base + static_cast<size_t>(r) * op.cols];
    for (int i = 0; i < op.cols; ++i) {
      gwr[i] += g * x[i];
      gx[i] += g * wr[i];
    }
  }
  for (int i = 0; i < op.cols; ++i) grads_[in[i]] += gx[i];
}

uint32_t Tape::PushConv1D(std::span<const uint32_t> in_ids, int w, int h,
                          std::span<const double> kernel, bool horizontal) {
  int klen = static_cast<int>(kernel.size());
  Check(static_cast<int>(in_ids.size()) == w * h, "conv: input size mismatch");
  Check(horizontal ? w >= klen : h >= klen, "conv: image smaller than kernel");
  uint32_t in_ofs = static_cast<uint32_t>(idx_arena_.size());
  idx_arena_.insert(idx_arena_.end(), in_ids.begin(), in_ids.end());
  uint32_t kern_ofs = static_cast<uint32_t>(aux_arena_.size());
  aux_arena_.insert(aux_arena_.end(), kernel.begin(), kernel.end());

  int ow = horizontal ? w - klen + 1 : w;
  int oh = horizontal ? h : h - klen + 1;
  uint32_t out_base = AllocRange(static_cast<size_t>(ow) * oh);

  const double* kern = &aux_arena_[kern_ofs];
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      if (horizontal) {
        const uint32_t* row = &idx_arena_[in_ofs + static_cast<size_t>(y) * w];
        for (int k = 0; k < klen; ++k) acc += kern[k] * values_[row[x + k]];
      } else {
        for (int k = 0; k < klen; ++k)
          acc += kern[k] *
                 values_[idx_arena_[in_ofs + static_cast<size_t>(y + k) * w + x]];
      }
      values_[out_base + static_cast<size_t>(y) * ow + x] = acc;
    }
  }

  conv_ops_.push_back({in_ofs, out_base, kern_ofs, w, h, klen, horizontal});
  PushSentinel(kConv, static_cast<uint32_t>(conv_ops_.size() - 1));
  return out_base;
}

void Tape::BackwardConv(const ConvOp& op) {
  const double* kern = &aux_arena_[op.kern_ofs];
  int ow = op.horizontal ? op.w - op.klen + 1 : op.w;
  int oh = op.horizontal ? op.h : op.h - op.klen + 1;
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double g = grads_[op.out_base + static_cast<size_t>(y) * ow + x];
      if (g == 0.0) continue;
      if (op.horizontal) {
        const uint32_t* row =
            &idx_arena_[op.in_ofs + static_cast<size_t>(y) * op.w];
        for (int k = 0; k < op.klen; ++k) grads_[row[x + k]] += g * kern[k];
      } else {
        for (int k = 0; k < op.klen; ++k)
          grads_[idx_arena_[op.in_ofs + static_cast<size_t>(y + k) * op.w + x]] +=
              g * kern[k];
      }
    }
  }
}

uint32_t Tape::PushComposite(std::span<const uint32_t> splat_nodes,
                             std::span<const uint32_t> order, int w, int h,
                             const double bg[3], double q_cutoff,
                             std::vector<double>* max_alpha) {
  uint32_t n = static_cast<uint32_t>(order.size());
  if (max_alpha) max_alpha->assign(n, 0.0);
  Check(splat_nodes.size() == static_cast<size_t>(n) * 9,
        "composite: splat table size mismatch");

  uint32_t table_ofs = static_cast<uint32_t>(idx_arena_.size());
  idx_arena_.insert(idx_arena_.end(), splat_nodes.begin(), splat_nodes.end());
  uint32_t order_ofs = static_cast<uint32_t>(idx_arena_.size());
  idx_arena_.insert(idx_arena_.end(), order.begin(), order.end());

  uint32_t px_ofs_ofs = static_cast<uint32_t>(idx_arena_.size());
  idx_arena_.resize(idx_arena_.size() + static_cast<size_t>(w) * h + 1);

  uint32_t out_base = AllocRange(static_cast<size_t>(w) * h * 3);

  // Gather splat parameters into a flat array for the pixel loop.
  scratch_.resize(static_cast<size_t>(n) * 9);
  for (uint32_t s = 0; s < n; ++s) {
    uint32_t src = order[s];
    for (int f = 0; f < 9; ++f)
      scratch_[s * 9 + f] = values_[splat_nodes[src * 9 + f]];
  }

  std::vector<uint32_t> pair_idx;
  std::vector<double> pair_alpha;
  pair_idx.reserve(static_cast<size_t>(w) * h * 4);
  pair_alpha.reserve(static_cast<size_t>(w) * h * 4);

  for (int y = 0; y < h; ++y) {
    double pv = y + 0.5;
    for (int x = 0; x < w; ++x) {
      idx_arena_[px_ofs_ofs + static_cast<size_t>(y) * w + x] =
          static_cast<uint32_t>(pair_idx.size());
      double pu = x + 0.5;
      double T = 1.0;
      double cr = 0.0, cg = 0.0, cb = 0.0;
      for (uint32_t s = 0; s < n; ++s) {
        const double* sp = &scratch_[s * 9];
        double du = pu - sp[0];
        double dv = pv - sp[1];
        double q = sp[2] * du * du + 2.0 * sp[3] * du * dv + sp[4] * dv * dv;
        if (q > q_cutoff) continue;
        double e = std::exp(-0.5 * q);
        double alpha = sp[5] * e;
        uint32_t flag = 0;
        if (alpha > 0.99) {
          alpha = 0.99;
          flag = kClampBit;
        }
        if (alpha == 0.0) continue;
        if (max_alpha) {
          double& m = (*max_alpha)[order[s]];
          if (alpha > m) m = alpha;
        }
        pair_idx.push_back(s | flag);
        pair_alpha.push_back(alpha);
        cr += sp[6] * alpha * T;
        cg += sp[7] * alpha * T;
        cb += sp[8] * alpha * T;
        T *= 1.0 - alpha;
      }
      size_t px = static_cast<size_t>(y) * w + x;
      values_[out_base + px * 3 + 0] = cr + bg[0] * T;
      values_[out_base + px * 3 + 1] = cg + bg[1] * T;
      values_[out_base + px * 3 + 2] = cb + bg[2] * T;
    }
  }
  idx_arena_[px_ofs_ofs + static_cast<size_t>(w) * h] =
      static_cast<uint32_t>(pair_idx.size());

  uint32_t pair_idx_ofs = static_cast<uint32_t>(idx_arena_.size());
  idx_arena_.insert(idx_arena_.end(), pair_idx.begin(), pair_idx.end());
  uint32_t pair_aux_ofs = static_cast<uint32_t>(aux_arena_.size());
  aux_arena_.insert(aux_arena_.end(), pair_alpha.begin(), pair_alpha.end());

  CompositeOp op;
  op.table_ofs = table_ofs;
  op.order_ofs = order_ofs;
  op.n_splats = n;
  op.px_ofs_ofs = px_ofs_ofs;
  op.pair_idx_ofs = pair_idx_ofs;
  op.pair_aux_ofs = pair_aux_ofs;
  op.out_base = out_base;
  op.w = w;
  op.h = h;
  op.bg[0] = bg[0];
  op.bg[1] = bg[1];
  op.bg[2] = bg[2];
  composite_ops_.push_back(op);
  PushSentinel(kComposite, static_cast<uint32_t>(composite_ops_.size() - 1));
  return out_base;
}

void Tape::BackwardComposite(const CompositeOp& op) {
  uint32_t n = op.n_splats;
  const uint32_t* order = &idx_arena_[op.order_ofs];
  const uint32_t* table = &idx_arena_[op.table_ofs];

  // Splat parameter values and gradient accumulators.
  scratch_.resize(static_cast<size_t>(n) * 18);
  double* sp = scratch_.data();
  double* gp = scratch_.data() + static_cast<size_t>(n) * 9;
  for (uint32_t s = 0; s < n; ++s) {
    uint32_t src = order[s];
    for (int f = 0; f < 9; ++f) sp[s * 9 + f] = values_[table[src * 9 + f]];
  }
  std::memset(gp, 0, static_cast<size_t>(n) * 9 * sizeof(double));

  std::vector<double> tbuf;  // prefix transmittance per contribution
  for (int y = 0; y < op.h; ++y) {
    double pv = y + 0.5;
    for (int x = 0; x < op.w; ++x) {
      size_t px = static_cast<size_t>(y) * op.w + x;
      uint32_t beg = idx_arena_[op.px_ofs_ofs + px];
      uint32_t end = idx_arena_[op.px_ofs_ofs + px + 1];
      if (beg == end) continue;
      double go[3] = {grads_[op.out_base + px * 3 + 0],
                      grads_[op.out_base + px * 3 + 1],
                      grads_[op.out_base + px * 3 + 2]};
      if (go[0] == 0.0 && go[1] == 0.0 && go[2] == 0.0) continue;
      double pu = x + 0.5;

      uint32_t cnt = end - beg;
      tbuf.resize(cnt);
      double T = 1.0;
      for (uint32_t i = 0; i < cnt; ++i) {
        tbuf[i] = T;
        T *= 1.0 - aux_arena_[op.pair_aux_ofs + beg + i];
      }
      // Suffix contribution behind each splat, per channel, including
      // background.
      double s_after[3] = {op.bg[0] * T, op.bg[1] * T, op.bg[2] * T};
      for (uint32_t ii = cnt; ii-- > 0;) {
        uint32_t rec = idx_arena_[op.pair_idx_ofs + beg + ii];
        uint32_t s = rec & ~kClampBit;
        bool clamped = (rec & kClampBit) != 0;
        double alpha = aux_arena_[op.pair_aux_ofs + beg + ii];
        double Ti = tbuf[ii];
        const double* p = &sp[s * 9];
        double* g = &gp[s * 9];

        double d_alpha = 0.0;
        for (int c = 0; c < 3; ++c) {
          // dC/dcolor_c = alpha * Ti ; dC/dalpha = c_i*Ti - S_after/(1-alpha)
          g[6 + c] += go[c] * alpha * Ti;
          d_alpha += go[c] * (p[6 + c] * Ti - s_after[c] / (1.0 - alpha));
          s_after[c] = s_after[c] + p[6 + c] * alpha * Ti;
        }
        if (!clamped) {
          double du = pu - p[0];
          double dv = pv - p[1];
          // alpha = opacity * exp(-q/2); recover the exponential from the
          // cached alpha instead of re-evaluating exp.
          double e = alpha / p[5];
          g[5] += d_alpha * e;
          double d_q = d_alpha * alpha * -0.5;
          g[2] += d_q * du * du;
          g[3] += d_q * 2.0 * du * dv;
          g[4] += d_q * dv * dv;
          double d_du = d_q * (2.0 * p[2] * du + 2.0 * p[3] * dv);
          double d_dv = d_q * (2.0 * p[3] * du + 2.0 * p[4] * dv);
          g[0] -= d_du;
          g[1] -= d_dv;
        }
      }
    }
  }

  for (uint32_t s = 0; s < n; ++s) {
    uint32_t src = order[s];
    for (int f = 0; f < 9; ++f) grads_[table[src * 9 + f]] += gp[s * 9 + f];
  }
}

void Tape::Backward(uint32_t loss_id) {
  grads_.assign(values_.size(), 0.0);
  grads_[loss_id] = 1.0;
  for (size_t i = scalar_ops_.size(); i-- > 0;) {
    const ScalarOp& op = scalar_ops_[i];
    if (op.out == kNone) {
      switch (op.a) {
        case kGemv:
          BackwardGemv(gemv_ops_[op.b]);
          break;
        case kConv:
          BackwardConv(conv_ops_[op.b]);
          break;
        default:
          BackwardComposite(composite_ops_[op.b]);
          break;
      }
      continue;
    }
    double g = grads_[op.out];
    if (g == 0.0) continue;
    grads_[op.a] += op.pa * g;
    if (op.b != kNone) grads_[op.b] += op.pb * g;
  }
}

}  // namespace cgs
