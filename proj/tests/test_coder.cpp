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
#include <numeric>
#include <vector>

#include "cgs/coder/location_codec.hpp"
#include "cgs/coder/range_coder.hpp"
#include "cgs/common.hpp"
#include "cgs/entropy/quant.hpp"

using namespace cgs;

TEST_CASE("AABAC roundtrip with a fixed pmf") {
  std::vector<double> pmf = {0.5, 0.25, 0.25};
  QuantizedCdf cdf = QuantizedCdf::FromPmf(pmf);
  std::vector<size_t> msg = {0, 0, 1, 0, 2};  // A A B A C

  RangeEncoder enc;
  for (size_t s : msg) cdf.EncodeSymbol(enc, s);
  std::vector<uint8_t> bytes = enc.Finish();

  RangeDecoder dec(bytes);
  for (size_t s : msg) CHECK(cdf.DecodeSymbol(dec) == s);
}

TEST_CASE("uniform-256 stream codes at 8 bits per symbol") {
  const size_t n = 1000000;
  std::vector<double> pmf(256, 1.0 / 256.0);
  QuantizedCdf cdf = QuantizedCdf::FromPmf(pmf);

  Rng rng(2024);
  std::vector<uint8_t> msg(n);
  for (uint8_t& v : msg) v = static_cast<uint8_t>(rng.NextBelow(256));

  RangeEncoder enc;
  for (uint8_t v : msg) cdf.EncodeSymbol(enc, v);
  std::vector<uint8_t> bytes = enc.Finish();

  // Within 0.1% of the Shannon length (1e6 bytes).
  CHECK(bytes.size() <= 1001000);
  CHECK(bytes.size() >= 999000);

  RangeDecoder dec(bytes);
  for (uint8_t v : msg) REQUIRE(cdf.DecodeSymbol(dec) == v);
}

TEST_CASE("single certain symbol costs at most 8 bytes") {
  std::vector<double> pmf = {1.0};
  QuantizedCdf cdf = QuantizedCdf::FromPmf(pmf);
  RangeEncoder enc;
  cdf.EncodeSymbol(enc, 0);
  std::vector<uint8_t> bytes = enc.Finish();
  CHECK(bytes.size() <= 8);
  RangeDecoder dec(bytes);
  CHECK(cdf.DecodeSymbol(dec) == 0);
}

TEST_CASE("skewed pmf codes near its entropy") {
  // H = 0.2*log2(5) + 0.8*log2(1.25) ~ 0.7219 bits/symbol
  std::vector<double> pmf = {0.8, 0.2};
  QuantizedCdf cdf = QuantizedCdf::FromPmf(pmf);
  Rng rng(5);
  const size_t n = 200000;
  std::vector<size_t> msg(n);
  double est_bits = 0;
  for (size_t i = 0; i < n; ++i) {
    msg[i] = rng.NextDouble() < 0.8 ? 0 : 1;
    est_bits += RateBits(pmf[msg[i]]);
  }
  RangeEncoder enc;
  for (size_t s : msg) cdf.EncodeSymbol(enc, s);
  std::vector<uint8_t> bytes = enc.Finish();
  double actual_bits = 8.0 * static_cast<double>(bytes.size());
  CHECK(actual_bits <= est_bits * 1.01 + 64.0);
  CHECK(actual_bits >= est_bits - 64.0);

  RangeDecoder dec(bytes);
  for (size_t s : msg) REQUIRE(cdf.DecodeSymbol(dec) == s);
}

TEST_CASE("adaptive conditioned pmfs roundtrip") {
  // pmf depends on the previously decoded symbol (order-1 context), plus the
  // self-updating byte model; both must stay in lockstep with the decoder.
  Rng rng(77);
  const size_t n = 1000000;
  std::vector<uint8_t> msg(n);
  uint8_t prev = 0;
  for (size_t i = 0; i < n; ++i) {
    // Source correlated with prev to give the adaptive model something.
    msg[i] = static_cast<uint8_t>((prev + rng.NextBelow(32)) & 0xFF);
    prev = msg[i];
  }

  RangeEncoder enc;
  {
    AdaptiveByteModel model;
    for (uint8_t v : msg) model.Encode(enc, v);
  }
  std::vector<uint8_t> bytes = enc.Finish();
  {
    RangeDecoder dec(bytes);
    AdaptiveByteModel model;
    for (uint8_t v : msg) REQUIRE(model.Decode(dec) == v);
  }
}

TEST_CASE("per-symbol conditional cdfs roundtrip") {
  // Gaussian-conditional style: each symbol's pmf depends on the previous
  // decoded value.
  Rng rng(90);
  const int lo = -20, hi = 20;
  const size_t n = 20000;
  std::vector<int> msg(n);
  double mean = 0;
  for (size_t i = 0; i < n; ++i) {
    int v = static_cast<int>(std::lround(mean + rng.NextNormal(0, 2)));
    v = std::max(lo, std::min(hi, v));
    msg[i] = v;
    mean = 0.7 * mean + 0.3 * v;
  }

  auto pmf_at = [&](double m) {
    std::vector<double> pmf(hi - lo + 1);
    for (int v = lo; v <= hi; ++v) pmf[v - lo] = GaussianBinMass(v, m, 2.5);
    return pmf;
  };

  RangeEncoder enc;
  mean = 0;
  for (size_t i = 0; i < n; ++i) {
    QuantizedCdf cdf = QuantizedCdf::FromPmf(pmf_at(mean));
    cdf.EncodeSymbol(enc, static_cast<size_t>(msg[i] - lo));
    mean = 0.7 * mean + 0.3 * msg[i];
  }
  std::vector<uint8_t> bytes = enc.Finish();

  RangeDecoder dec(bytes);
  mean = 0;
  for (size_t i = 0; i < n; ++i) {
    QuantizedCdf cdf = QuantizedCdf::FromPmf(pmf_at(mean));
    int got = lo + static_cast<int>(cdf.DecodeSymbol(dec));
    REQUIRE(got == msg[i]);
    mean = 0.7 * mean + 0.3 * got;
  }
}

TEST_CASE("mismatched pmfs fail a checksum, truncation is an error") {
  std::vector<double> pmf = {0.7, 0.2, 0.1};
  QuantizedCdf cdf = QuantizedCdf::FromPmf(pmf);
  Rng rng(8);
  std::vector<size_t> msg(4000);
  uint32_t checksum = 0;
  for (size_t& s : msg) {
    double u = rng.NextDouble();
    s = u < 0.7 ? 0 : (u < 0.9 ? 1 : 2);
    checksum = checksum * 31 + static_cast<uint32_t>(s);
  }
  RangeEncoder enc;
  for (size_t s : msg) cdf.EncodeSymbol(enc, s);
  std::vector<uint8_t> bytes = enc.Finish();

  // Decoding under a different pmf produces a different symbol stream.
  std::vector<double> wrong_pmf = {0.1, 0.2, 0.7};
  QuantizedCdf wrong = QuantizedCdf::FromPmf(wrong_pmf);
  RangeDecoder dec(bytes);
  uint32_t got = 0;
  bool threw = false;
  try {
    for (size_t i = 0; i < msg.size(); ++i)
      got = got * 31 + static_cast<uint32_t>(wrong.DecodeSymbol(dec));
  } catch (const Error&) {
    threw = true;  // ran off the end of the stream
  }
  CHECK((threw || got != checksum));

  // Truncated stream raises a dedicated error.
  std::vector<uint8_t> cut(bytes.begin(), bytes.begin() + 3);
  CHECK_THROWS_WITH(
      [&] {
        RangeDecoder d(cut);
        for (size_t i = 0; i < msg.size(); ++i) cdf.DecodeSymbol(d);
      }(),
      "unexpected end of bitstream");
}

TEST_CASE("morton code round trips against a bit-interleave oracle") {
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    uint32_t x = rng.NextBelow(1u << 21);
    uint32_t y = rng.NextBelow(1u << 21);
    uint32_t z = rng.NextBelow(1u << 21);
    uint64_t key = MortonEncode(x, y, z);
    uint64_t want = 0;
    for (int b = 0; b < 21; ++b) {
      want |= (static_cast<uint64_t>((x >> b) & 1)) << (3 * b);
      want |= (static_cast<uint64_t>((y >> b) & 1)) << (3 * b + 1);
      want |= (static_cast<uint64_t>((z >> b) & 1)) << (3 * b + 2);
    }
    CHECK(key == want);
  }
}

TEST_CASE("single anchor location roundtrip") {
  std::vector<Vec3d> pts = {{1.25, -3.5, 0.75}};
  LocationGrid grid = QuantizeLocations(pts, 0.01);
  auto bytes = EncodeLocations(grid.coords);
  auto back = DecodeLocations(bytes, 1);
  CHECK(back == grid.coords);
  Vec3d deq = grid.Dequantize(0);
  CHECK(std::fabs(deq.x - 1.25) <= 0.005 + 1e-9);
  CHECK(std::fabs(deq.y + 3.5) <= 0.005 + 1e-9);
}

TEST_CASE("adjacent grid cells delta-code to unit steps") {
  std::vector<Vec3d> pts = {{0.0, 0.0, 0.0}, {0.01, 0.0, 0.0}};
  LocationGrid grid = QuantizeLocations(pts, 0.01);
  REQUIRE(grid.coords.size() == 2);
  CHECK(grid.coords[1][0] - grid.coords[0][0] == 1);
  CHECK(grid.coords[1][1] == grid.coords[0][1]);
}

TEST_CASE("10^4 random anchors roundtrip bit-exactly") {
  Rng rng(123);
  std::vector<Vec3d> pts;
  for (int i = 0; i < 10000; ++i)
    pts.push_back({rng.NextUniform(-10, 10), rng.NextUniform(-10, 10),
                   rng.NextUniform(-10, 10)});
  LocationGrid grid = QuantizeLocations(pts, 0.005);
  std::vector<uint32_t> order = MortonOrder(grid);
  std::vector<std::array<uint32_t, 3>> sorted(order.size());
  for (size_t i = 0; i < order.size(); ++i) sorted[i] = grid.coords[order[i]];

  auto bytes = EncodeLocations(sorted);
  auto back = DecodeLocations(bytes, sorted.size());
  REQUIRE(back.size() == sorted.size());
  CHECK(back == sorted);

  // Morton+delta beats raw coordinates comfortably on dense sets.
  CHECK(bytes.size() < sorted.size() * 12);
}

TEST_CASE("grid overflow is an error") {
  std::vector<Vec3d> pts = {{0, 0, 0}, {1e9, 0, 0}};
  CHECK_THROWS_WITH(QuantizeLocations(pts, 0.0001), "grid overflow");
}
