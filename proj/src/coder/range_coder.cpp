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

#include "cgs/coder/range_coder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cgs/common.hpp"
#include "cgs/entropy/quant.hpp"

namespace cgs {

namespace {
constexpr uint32_t kTopValue = 1u << 24;
}

void RangeEncoder::ShiftLow() {
  if (static_cast<uint32_t>(low_ >> 32) != 0 ||
      static_cast<uint32_t>(low_) < 0xFF000000u) {
    uint8_t carry = static_cast<uint8_t>(low_ >> 32);
    do {
      bytes_.push_back(static_cast<uint8_t>(cache_ + carry));
      cache_ = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<uint8_t>(low_ >> 24);
  }
  ++cache_size_;
  low_ = (low_ & 0x00FFFFFFull) << 8;
}

void RangeEncoder::Encode(uint32_t cum, uint32_t freq, uint32_t total) {
  Check(freq > 0 && total <= kFreqTotal && cum + freq <= total,
        "invalid frequency interval");
  uint32_t r = range_ / total;
  low_ += static_cast<uint64_t>(r) * cum;
  range_ = r * freq;
  while (range_ < kTopValue) {
    range_ <<= 8;
    ShiftLow();
  }
}

std::vector<uint8_t> RangeEncoder::Finish() {
  for (int i = 0; i < 5; ++i) ShiftLow();
  return std::move(bytes_);
}

RangeDecoder::RangeDecoder(std::span<const uint8_t> bytes) : bytes_(bytes) {
  // The first emitted byte is the initial zero cache.
  for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | NextByte();
}

uint8_t RangeDecoder::NextByte() {
  if (pos_ >= bytes_.size()) Fail("unexpected end of bitstream");
  return bytes_[pos_++];
}

uint32_t RangeDecoder::DecodeTarget(uint32_t total) {
  range_ /= total;
  uint32_t t = code_ / range_;
  return t >= total ? total - 1 : t;
}

void RangeDecoder::Consume(uint32_t cum, uint32_t freq, uint32_t total) {
  (void)total;  // range_ was already divided in DecodeTarget
  code_ -= cum * range_;
  range_ *= freq;
  while (range_ < kTopValue) {
    code_ = (code_ << 8) | NextByte();
    range_ <<= 8;
  }
}

QuantizedCdf QuantizedCdf::FromPmf(std::span<const double> pmf) {
  size_t n = pmf.size();
  Check(n >= 1 && n <= kFreqTotal, "pmf size out of range");

  // Floor, normalize, then apportion 2^16 slots by largest remainder with a
  // minimum width of 1.
  std::vector<double> p(n);
  double z = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double v = pmf[i];
    if (!(v >= 0.0)) Fail("negative probability");
    p[i] = std::max(v, kPmfFloor);
    z += p[i];
  }

  std::vector<uint32_t> w(n);
  std::vector<std::pair<double, size_t>> rem(n);
  uint64_t assigned = 0;
  for (size_t i = 0; i < n; ++i) {
    double ideal = p[i] / z * kFreqTotal;
    double fl = std::floor(ideal);
    w[i] = std::max<uint32_t>(1, static_cast<uint32_t>(fl));
    rem[i] = {ideal - fl, i};
    assigned += w[i];
  }
  if (assigned < kFreqTotal) {
    // Hand out the remaining slots to the largest remainders.
    std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    uint64_t left = kFreqTotal - assigned;
    for (size_t i = 0; left > 0; i = (i + 1) % n) {
      ++w[rem[i].second];
      --left;
    }
  } else if (assigned > kFreqTotal) {
    // Minimum widths overshot; shave the largest widths.
    uint64_t extra = assigned - kFreqTotal;
    while (extra > 0) {
      size_t best = 0;
      for (size_t i = 1; i < n; ++i)
        if (w[i] > w[best]) best = i;
      uint32_t take = static_cast<uint32_t>(
          std::min<uint64_t>(extra, w[best] > 1 ? w[best] - 1 : 0));
      Check(take > 0, "cannot quantize pmf");
      w[best] -= take;
      extra -= take;
    }
  }

  QuantizedCdf cdf;
  cdf.cum_.resize(n + 1);
  cdf.cum_[0] = 0;
  for (size_t i = 0; i < n; ++i) cdf.cum_[i + 1] = cdf.cum_[i] + w[i];
  Check(cdf.cum_[n] == kFreqTotal, "cdf does not sum to total");
  return cdf;
}

void QuantizedCdf::EncodeSymbol(RangeEncoder& enc, size_t index) const {
  enc.Encode(cum(index), freq(index), kFreqTotal);
}

size_t QuantizedCdf::DecodeSymbol(RangeDecoder& dec) const {
  uint32_t target = dec.DecodeTarget(kFreqTotal);
  // cum_ is strictly... monotone non-decreasing; find the bucket.
  size_t lo = 0, hi = size();
  while (hi - lo > 1) {
    size_t mid = (lo + hi) / 2;
    if (cum_[mid] <= target)
      lo = mid;
    else
      hi = mid;
  }
  dec.Consume(cum(lo), freq(lo), kFreqTotal);
  return lo;
}

AdaptiveByteModel::AdaptiveByteModel() : freq_(256, 1), total_(256) {}

void AdaptiveByteModel::Bump(uint8_t sym) {
  freq_[sym] += 24;
  total_ += 24;
  if (total_ > 1u << 15) {
    total_ = 0;
    for (uint32_t& f : freq_) {
      f = (f + 1) >> 1;
      total_ += f;
    }
  }
}

void AdaptiveByteModel::Encode(RangeEncoder& enc, uint8_t sym) {
  uint32_t cum = 0;
  for (int i = 0; i < sym; ++i) cum += freq_[i];
  enc.Encode(cum, freq_[sym], total_);
  Bump(sym);
}

uint8_t AdaptiveByteModel::Decode(RangeDecoder& dec) {
  uint32_t target = dec.DecodeTarget(total_);
  uint32_t cum = 0;
  int sym = 0;
  while (cum + freq_[sym] <= target) {
    cum += freq_[sym];
    ++sym;
  }
  dec.Consume(cum, freq_[sym], total_);
  Bump(static_cast<uint8_t>(sym));
  return static_cast<uint8_t>(sym);
}

}  // namespace cgs
