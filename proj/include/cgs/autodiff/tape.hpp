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

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "cgs/common.hpp"

namespace cgs {

// Reverse-mode tape. Forward values are computed eagerly as nodes are
// recorded; Backward() replays the op stream once in reverse. Scalar ops
// store their local partial derivatives at record time, so the reverse sweep
// is a single loop without opcode dispatch. A few fused vector ops (matrix-
// vector product, separable convolution, splat compositing) keep large graphs
// compact; each knows how to push gradients to its inputs.
class Tape {
 public:
  static constexpr uint32_t kNone = 0xFFFFFFFFu;

  void Reset() {
    values_.clear();
    grads_.clear();
    scalar_ops_.clear();
    gemv_ops_.clear();
    conv_ops_.clear();
    composite_ops_.clear();
    idx_arena_.clear();
    aux_arena_.clear();
  }

  size_t node_count() const { return values_.size(); }
  size_t op_count() const { return scalar_ops_.size(); }

  double value(uint32_t id) const { return values_[id]; }
  double grad(uint32_t id) const { return grads_[id]; }

  uint32_t NewLeaf(double v) {
    values_.push_back(v);
    return static_cast<uint32_t>(values_.size() - 1);
  }

  // Pushes a contiguous block of leaves, returns the base id.
  uint32_t PushLeaves(std::span<const double> vals) {
    uint32_t base = static_cast<uint32_t>(values_.size());
    values_.insert(values_.end(), vals.begin(), vals.end());
    return base;
  }

  uint32_t AllocRange(size_t n) {
    uint32_t base = static_cast<uint32_t>(values_.size());
    values_.resize(values_.size() + n);
    return base;
  }

  uint32_t Unary(uint32_t a, double out, double pa) {
    uint32_t id = NewLeaf(out);
    scalar_ops_.push_back({id, a, kNone, pa, 0.0});
    return id;
  }

  uint32_t Binary(uint32_t a, uint32_t b, double out, double pa, double pb) {
    uint32_t id = NewLeaf(out);
    scalar_ops_.push_back({id, a, b, pa, pb});
    return id;
  }

  // y = W x + b with W row-major [rows x cols] at node range w_base and bias
  // at b_base. Input node ids may be scattered; outputs are contiguous.
  uint32_t PushGemv(uint32_t w_base, uint32_t b_base,
                    std::span<const uint32_t> in_ids, int rows, int cols);

  // Valid 1-D convolution of a [h x w] node grid along x (horizontal=true)
  // or y. Kernel values are captured by copy.
  uint32_t PushConv1D(std::span<const uint32_t> in_ids, int w, int h,
                      std::span<const double> kernel, bool horizontal);

  // Front-to-back alpha compositing of projected splats over a w x h RGB
  // image. Each splat contributes 9 node ids:
  //   mean_u, mean_v, inv_a, inv_b, inv_c, opacity, r, g, b
  // where (inv_a, inv_b, inv_c) is the inverse 2-D covariance. Splats are
  // composited in increasing (depth, index) order given by `order`.
  // Contributions with d^T Lambda d > q_cutoff are skipped (pass a huge
  // cutoff to disable). Alpha is clamped at 0.99. Returns the base id of
  // 3*w*h contiguous outputs, RGB interleaved row-major.
  // When given, max_alpha receives each splat's maximum composited alpha
  // over all pixels (indexed like the splat table, before ordering).
  uint32_t PushComposite(std::span<const uint32_t> splat_nodes,  // 9 per splat
                         std::span<const uint32_t> order, int w, int h,
                         const double bg[3], double q_cutoff,
                         std::vector<double>* max_alpha = nullptr);

  // Seeds d(loss)/d(loss) = 1 and accumulates gradients for every node.
  void Backward(uint32_t loss_id);

 private:
  struct ScalarOp {
    uint32_t out, a, b;
    double pa, pb;
  };
  struct GemvOp {
    uint32_t w_base, b_base, in_ofs, out_base;
    int rows, cols;
  };
  struct ConvOp {
    uint32_t in_ofs, out_base, kern_ofs;
    int w, h, klen;
    bool horizontal;
  };
  struct CompositeOp {
    uint32_t table_ofs;    // 9 * n_splats ids
    uint32_t order_ofs;    // n_splats sorted indices
    uint32_t n_splats;
    uint32_t px_ofs_ofs;   // w*h + 1 offsets into the pair cache
    uint32_t pair_idx_ofs; // per pair: order position | kClampBit
    uint32_t pair_aux_ofs; // per pair: cached alpha
    uint32_t out_base;
    int w, h;
    double bg[3];
  };
  static constexpr uint32_t kClampBit = 0x80000000u;

  // Interleaved op order marker: scalar_ops_ entries with out == kNone -
  // never produced - are not used; instead custom ops are sequenced by
  // sentinel records whose `a` holds the op kind and `b` the index.
  enum CustomKind : uint32_t { kGemv = 0, kConv = 1, kComposite = 2 };

  void PushSentinel(CustomKind kind, uint32_t index) {
    scalar_ops_.push_back({kNone, static_cast<uint32_t>(kind), index, 0, 0});
  }

  void BackwardGemv(const GemvOp& op);
  void BackwardConv(const ConvOp& op);
  void BackwardComposite(const CompositeOp& op);

  std::vector<double> values_;
  std::vector<double> grads_;
  std::vector<ScalarOp> scalar_ops_;
  std::vector<GemvOp> gemv_ops_;
  std::vector<ConvOp> conv_ops_;
  std::vector<CompositeOp> composite_ops_;
  std::vector<uint32_t> idx_arena_;
  std::vector<double> aux_arena_;
  std::vector<double> scratch_;
};

// Value-with-tape handle. Arithmetic records nodes on the owning tape.
struct Var {
  Tape* tape = nullptr;
  uint32_t id = Tape::kNone;

  Var() = default;
  Var(Tape& t, uint32_t i) : tape(&t), id(i) {}

  double val() const { return tape->value(id); }
};

inline Var MakeLeaf(Tape& t, double v) { return Var(t, t.NewLeaf(v)); }

inline Var operator+(Var a, Var b) {
  return Var(*a.tape, a.tape->Binary(a.id, b.id, a.val() + b.val(), 1.0, 1.0));
}
inline Var operator-(Var a, Var b) {
  return Var(*a.tape, a.tape->Binary(a.id, b.id, a.val() - b.val(), 1.0, -1.0));
}
inline Var operator*(Var a, Var b) {
  return Var(*a.tape,
             a.tape->Binary(a.id, b.id, a.val() * b.val(), b.val(), a.val()));
}
inline Var operator/(Var a, Var b) {
  double bv = b.val();
  double out = a.val() / bv;
  return Var(*a.tape, a.tape->Binary(a.id, b.id, out, 1.0 / bv, -out / bv));
}
inline Var operator+(Var a, double c) {
  return Var(*a.tape, a.tape->Unary(a.id, a.val() + c, 1.0));
}
inline Var operator+(double c, Var a) { return a + c; }
inline Var operator-(Var a, double c) { return a + (-c); }
inline Var operator-(double c, Var a) {
  return Var(*a.tape, a.tape->Unary(a.id, c - a.val(), -1.0));
}
inline Var operator*(Var a, double c) {
  return Var(*a.tape, a.tape->Unary(a.id, a.val() * c, c));
}
inline Var operator*(double c, Var a) { return a * c; }
inline Var operator/(Var a, double c) { return a * (1.0 / c); }
inline Var operator/(double c, Var a) {
  double av = a.val();
  return Var(*a.tape, a.tape->Unary(a.id, c / av, -c / (av * av)));
}
inline Var operator-(Var a) { return a * -1.0; }

inline Var exp(Var a) {
  double e = std::exp(a.val());
  return Var(*a.tape, a.tape->Unary(a.id, e, e));
}
inline Var log(Var a) {
  return Var(*a.tape, a.tape->Unary(a.id, std::log(a.val()), 1.0 / a.val()));
}
inline Var sqrt(Var a) {
  double s = std::sqrt(a.val());
  return Var(*a.tape, a.tape->Unary(a.id, s, 0.5 / s));
}
inline Var abs(Var a) {
  double v = a.val();
  return Var(*a.tape, a.tape->Unary(a.id, std::fabs(v), v < 0 ? -1.0 : 1.0));
}
inline Var sigmoid(Var a) {
  double s = 1.0 / (1.0 + std::exp(-a.val()));
  return Var(*a.tape, a.tape->Unary(a.id, s, s * (1.0 - s)));
}
inline Var softplus(Var a) {
  double x = a.val();
  double out = x > 30.0 ? x : std::log1p(std::exp(x));
  double s = 1.0 / (1.0 + std::exp(-x));
  return Var(*a.tape, a.tape->Unary(a.id, out, s));
}
inline Var relu(Var a) {
  double v = a.val();
  return Var(*a.tape, a.tape->Unary(a.id, v > 0 ? v : 0.0, v > 0 ? 1.0 : 0.0));
}
inline Var erfc(Var a) {
  double x = a.val();
  double d = -2.0 / std::sqrt(M_PI) * std::exp(-x * x);
  return Var(*a.tape, a.tape->Unary(a.id, std::erfc(x), d));
}
// max(a, c) with a constant; gradient is zero on the clamped side.
inline Var vmax(Var a, double c) {
  double v = a.val();
  return Var(*a.tape, a.tape->Unary(a.id, v > c ? v : c, v > c ? 1.0 : 0.0));
}
inline Var vmin(Var a, double c) {
  double v = a.val();
  return Var(*a.tape, a.tape->Unary(a.id, v < c ? v : c, v < c ? 1.0 : 0.0));
}

}  // namespace cgs
