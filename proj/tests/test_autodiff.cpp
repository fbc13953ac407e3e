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

#include <cmath>
#include <functional>
#include <vector>

#include "cgs/autodiff/tape.hpp"
#include "cgs/common.hpp"

using namespace cgs;

namespace {

// Central-difference gradient of a scalar function of n inputs.
std::vector<double> NumericGrad(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double h = 1e-6) {
  std::vector<double> g(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double keep = x[i];
    x[i] = keep + h;
    double hi = f(x);
    x[i] = keep - h;
    double lo = f(x);
    x[i] = keep;
    g[i] = (hi - lo) / (2 * h);
  }
  return g;
}

void CheckGrads(const std::vector<double>& analytic,
                const std::vector<double>& numeric, double tol = 1e-6) {
  REQUIRE(analytic.size() == numeric.size());
  for (size_t i = 0; i < analytic.size(); ++i) {
    double scale = std::max({1.0, std::fabs(analytic[i]), std::fabs(numeric[i])});
    CHECK(std::fabs(analytic[i] - numeric[i]) / scale < tol);
  }
}

}  // namespace

TEST_CASE("d(theta^2)/dtheta = 2 theta") {
  Tape tape;
  Var x = MakeLeaf(tape, 3.0);
  Var y = x * x;
  tape.Backward(y.id);
  CHECK(tape.grad(x.id) == doctest::Approx(6.0));
}

TEST_CASE("scalar op gradients match central differences") {
  auto f = [](const std::vector<double>& v) {
    double a = v[0], b = v[1], c = v[2];
    double t1 = std::exp(a * b) + std::log(c + 3.0);
    double t2 = std::sqrt(c + 2.0) * (1.0 / (1.0 + std::exp(-a)));
    double t3 = std::erfc(b * 0.5) + std::fabs(a - 0.3) + std::log1p(std::exp(b));
    return t1 * t2 + t3 / (a + b + c + 5.0);
  };
  std::vector<double> x = {0.4, -0.7, 1.3};

  Tape tape;
  Var a = MakeLeaf(tape, x[0]), b = MakeLeaf(tape, x[1]), c = MakeLeaf(tape, x[2]);
  Var t1 = exp(a * b) + log(c + 3.0);
  Var t2 = sqrt(c + 2.0) * sigmoid(a);
  Var t3 = erfc(b * 0.5) + abs(a - 0.3) + softplus(b);
  Var y = t1 * t2 + t3 / (a + b + c + 5.0);
  CHECK(y.val() == doctest::Approx(f(x)).epsilon(1e-12));
  tape.Backward(y.id);

  auto num = NumericGrad(f, x);
  CheckGrads({tape.grad(a.id), tape.grad(b.id), tape.grad(c.id)}, num);
}

TEST_CASE("gemv op forward and backward") {
  Rng rng(42);
  const int rows = 5, cols = 7;
  std::vector<double> w(rows * cols), bias(rows), xv(cols);
  for (double& v : w) v = rng.NextNormal();
  for (double& v : bias) v = rng.NextNormal();
  for (double& v : xv) v = rng.NextNormal();

  // Loss = sum of squares of y; inputs laid out as [w, bias, x].
  auto f = [&](const std::vector<double>& all) {
    double loss = 0;
    for (int r = 0; r < rows; ++r) {
      double acc = all[rows * cols + r];
      for (int i = 0; i < cols; ++i)
        acc += all[r * cols + i] * all[rows * cols + rows + i];
      loss += acc * acc;
    }
    return loss;
  };

  std::vector<double> all;
  all.insert(all.end(), w.begin(), w.end());
  all.insert(all.end(), bias.begin(), bias.end());
  all.insert(all.end(), xv.begin(), xv.end());

  Tape tape;
  uint32_t wb = tape.PushLeaves(w);
  uint32_t bb = tape.PushLeaves(bias);
  uint32_t xb = tape.PushLeaves(xv);
  std::vector<uint32_t> xids(cols);
  for (int i = 0; i < cols; ++i) xids[i] = xb + i;
  uint32_t yb = tape.PushGemv(wb, bb, xids, rows, cols);
  Var loss;
  for (int r = 0; r < rows; ++r) {
    Var yr(tape, yb + r);
    loss = r == 0 ? yr * yr : loss + yr * yr;
  }
  CHECK(loss.val() == doctest::Approx(f(all)).epsilon(1e-12));
  tape.Backward(loss.id);

  std::vector<double> analytic;
  for (size_t i = 0; i < all.size(); ++i)
    analytic.push_back(tape.grad(wb + static_cast<uint32_t>(i)));
  CheckGrads(analytic, NumericGrad(f, all, 1e-5), 1e-5);
}

TEST_CASE("conv1d op matches a direct loop and its gradient") {
  Rng rng(3);
  const int w = 9, h = 5, klen = 3;
  std::vector<double> img(w * h), kern(klen);
  for (double& v : img) v = rng.NextDouble();
  for (double& v : kern) v = rng.NextDouble();

  auto f = [&](const std::vector<double>& in) {
    double loss = 0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x + klen <= w; ++x) {
        double acc = 0;
        for (int k = 0; k < klen; ++k) acc += kern[k] * in[y * w + x + k];
        loss += acc * acc;
      }
    return loss;
  };

  Tape tape;
  uint32_t ib = tape.PushLeaves(img);
  std::vector<uint32_t> ids(img.size());
  for (size_t i = 0; i < ids.size(); ++i) ids[i] = ib + static_cast<uint32_t>(i);
  uint32_t ob = tape.PushConv1D(ids, w, h, kern, true);
  int ow = w - klen + 1;
  Var loss;
  for (int i = 0; i < ow * h; ++i) {
    Var o(tape, ob + i);
    loss = i == 0 ? o * o : loss + o * o;
  }
  CHECK(loss.val() == doctest::Approx(f(img)).epsilon(1e-12));
  tape.Backward(loss.id);

  std::vector<double> analytic(img.size());
  for (size_t i = 0; i < img.size(); ++i)
    analytic[i] = tape.grad(ib + static_cast<uint32_t>(i));
  CheckGrads(analytic, NumericGrad(f, img, 1e-6));
}

TEST_CASE("composite op gradient matches finite differences") {
  // Two overlapping splats over a 6x6 image, plus background.
  const int W = 6, H = 6;
  const double bg[3] = {0.2, 0.1, 0.3};
  // per splat: mean_u, mean_v, inv_a, inv_b, inv_c, opacity, r, g, b
  std::vector<double> params = {
      2.5, 3.0, 0.30, 0.05,  0.25, 0.7, 0.9, 0.2, 0.1,
      3.5, 2.8, 0.20, -0.04, 0.35, 0.5, 0.1, 0.8, 0.3,
  };

  auto f = [&](const std::vector<double>& p) {
    double loss = 0;
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        double T = 1.0;
        double c[3] = {0, 0, 0};
        for (int s = 0; s < 2; ++s) {
          const double* sp = &p[s * 9];
          double du = x + 0.5 - sp[0];
          double dv = y + 0.5 - sp[1];
          double q = sp[2] * du * du + 2.0 * sp[3] * du * dv + sp[4] * dv * dv;
          double alpha = sp[5] * std::exp(-0.5 * q);
          if (alpha > 0.99) alpha = 0.99;
          for (int ch = 0; ch < 3; ++ch) c[ch] += sp[6 + ch] * alpha * T;
          T *= 1.0 - alpha;
        }
        for (int ch = 0; ch < 3; ++ch) {
          double v = c[ch] + bg[ch] * T;
          loss += v * v;
        }
      }
    return loss;
  };

  Tape tape;
  uint32_t pb = tape.PushLeaves(params);
  std::vector<uint32_t> table(18);
  for (int i = 0; i < 18; ++i) table[i] = pb + i;
  std::vector<uint32_t> order = {0, 1};  // splat 0 in front
  uint32_t img = tape.PushComposite(table, order, W, H, bg, 1e30);
  Var loss;
  for (int i = 0; i < W * H * 3; ++i) {
    Var o(tape, img + i);
    loss = i == 0 ? o * o : loss + o * o;
  }
  CHECK(loss.val() == doctest::Approx(f(params)).epsilon(1e-12));
  tape.Backward(loss.id);

  std::vector<double> analytic(params.size());
  for (size_t i = 0; i < params.size(); ++i)
    analytic[i] = tape.grad(pb + static_cast<uint32_t>(i));
  CheckGrads(analytic, NumericGrad(f, params, 1e-6), 1e-5);
}

TEST_CASE("composite clamps alpha at 0.99 with zero gradient") {
  const int W = 2, H = 2;
  const double bg[3] = {0, 0, 0};
  std::vector<double> params = {1.0, 1.0, 0.5, 0.0, 0.5, 5.0, 1.0, 1.0, 1.0};

  Tape tape;
  uint32_t pb = tape.PushLeaves(params);
  std::vector<uint32_t> table(9);
  for (int i = 0; i < 9; ++i) table[i] = pb + i;
  std::vector<uint32_t> order = {0};
  uint32_t img = tape.PushComposite(table, order, W, H, bg, 1e30);
  // At pixel center (0.5, 0.5): q = 0.25, alpha = 5*exp(-0.125) > 0.99.
  CHECK(tape.value(img) == doctest::Approx(0.99));
  tape.Backward(img);
  CHECK(tape.grad(pb + 5) == 0.0);  // opacity has no gradient when clamped
}

TEST_CASE("support cutoff drops far contributions") {
  const int W = 8, H = 1;
  const double bg[3] = {0, 0, 0};
  std::vector<double> params = {0.5, 0.5, 4.0, 0.0, 4.0, 0.8, 1.0, 1.0, 1.0};
  Tape tape;
  uint32_t pb = tape.PushLeaves(params);
  std::vector<uint32_t> table(9);
  for (int i = 0; i < 9; ++i) table[i] = pb + i;
  std::vector<uint32_t> order = {0};
  uint32_t img = tape.PushComposite(table, order, W, H, bg, 9.0);
  // q at pixel x: 4*(x - 0)^2; q <= 9 only for pixels 0 and 1.
  CHECK(tape.value(img + 0 * 3) > 0.0);
  CHECK(tape.value(img + 1 * 3) > 0.0);
  CHECK(tape.value(img + 2 * 3) == 0.0);
  CHECK(tape.value(img + 7 * 3) == 0.0);
}
