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

#include <cstdint>
#include <span>
#include <vector>

namespace cgs {

inline constexpr uint32_t kFreqBits = 16;
inline constexpr uint32_t kFreqTotal = 1u << kFreqBits;  // CDF resolution

// Byte-oriented range coder (carry-counting variant). The 64-bit low
// accumulator absorbs carries; the range is renormalized a byte at a time
// whenever it drops below 2^24, so it always holds at least 24 bits of
// precision when a symbol is coded.
class RangeEncoder {
 public:
  // Codes a symbol occupying [cum, cum + freq) of a total-frequency scale.
  // freq must be positive and total <= 2^16.
  void Encode(uint32_t cum, uint32_t freq, uint32_t total);

  // Flushes the tail and returns the stream.
  std::vector<uint8_t> Finish();

 private:
  void ShiftLow();

  uint64_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint8_t cache_ = 0;
  uint64_t cache_size_ = 1;
  std::vector<uint8_t> bytes_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const uint8_t> bytes);

  // Returns a value in [0, total); the caller locates the symbol whose
  // [cum, cum+freq) interval contains it, then calls Consume.
  uint32_t DecodeTarget(uint32_t total);
  void Consume(uint32_t cum, uint32_t freq, uint32_t total);

  size_t bytes_read() const { return pos_; }

 private:
  uint8_t NextByte();

  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint32_t code_ = 0;
};

// Integer CDF over a contiguous symbol alphabet, summing exactly to 2^16
// with every width >= 1. Built from a real-valued pmf by largest-remainder
// apportionment, flooring the pmf at 2^-16 first.
class QuantizedCdf {
 public:
  static QuantizedCdf FromPmf(std::span<const double> pmf);

  uint32_t cum(size_t i) const { return cum_[i]; }
  uint32_t freq(size_t i) const { return cum_[i + 1] - cum_[i]; }
  size_t size() const { return cum_.size() - 1; }

  void EncodeSymbol(RangeEncoder& enc, size_t index) const;
  size_t DecodeSymbol(RangeDecoder& dec) const;

 private:
  std::vector<uint32_t> cum_;  // size() + 1 entries, cum_[size()] == 2^16
};

// Adaptive order-0 byte model with periodic halving; encoder and decoder
// update in lockstep.
class AdaptiveByteModel {
 public:
  AdaptiveByteModel();
  void Encode(RangeEncoder& enc, uint8_t sym);
  uint8_t Decode(RangeDecoder& dec);

 private:
  void Bump(uint8_t sym);
  std::vector<uint32_t> freq_;
  uint32_t total_ = 0;
};

}  // namespace cgs
