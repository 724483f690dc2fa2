// Copyright 2025 The dpcomm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPCOMM_TRANSCRIPT_HPP_
#define DPCOMM_TRANSCRIPT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "dpcomm/errors.hpp"

namespace dpcomm {

// Exact communication accounting for one protocol run (or an accumulation
// over trials).  bits_total is the sum of serialized report payload sizes,
// never an estimate.
struct TranscriptStats {
  std::uint64_t bits_total = 0;
  std::uint64_t messages_total = 0;
  std::uint64_t client_slots = 0;  // n summed over trials
  double accounted_eps = 0.0;
  double accounted_delta = 0.0;

  double bits_per_client_mean() const {
    return client_slots == 0
               ? 0.0
               : static_cast<double>(bits_total) /
                     static_cast<double>(client_slots);
  }

  void merge(const TranscriptStats& other) {
    bits_total += other.bits_total;
    messages_total += other.messages_total;
    client_slots += other.client_slots;
  }
};

// Big-endian bit packer: fields are written most-significant-bit first.
class BitWriter {
 public:
  void put(std::uint64_t value, int bits) {
    for (int i = bits - 1; i >= 0; --i) push_bit((value >> i) & 1u);
  }

  std::uint64_t bit_count() const { return bit_count_; }

  // Trailing partial byte is zero-padded.
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  void push_bit(std::uint64_t b) {
    const int offset = static_cast<int>(bit_count_ % 8);
    if (offset == 0) bytes_.push_back(0);
    if (b) bytes_.back() |= static_cast<std::uint8_t>(1u << (7 - offset));
    ++bit_count_;
  }

  std::vector<std::uint8_t> bytes_;
  std::uint64_t bit_count_ = 0;
};

class BitReader {
 public:
  explicit BitReader(const std::vector<std::uint8_t>& bytes)
      : bytes_(bytes) {}

  std::uint64_t get(int bits) {
    std::uint64_t out = 0;
    for (int i = 0; i < bits; ++i) {
      const std::uint64_t byte_index = cursor_ / 8;
      if (byte_index >= bytes_.size()) {
        throw ProtocolViolation("BitReader: read past end of buffer");
      }
      const int offset = static_cast<int>(cursor_ % 8);
      const std::uint64_t bit = (bytes_[byte_index] >> (7 - offset)) & 1u;
      out = (out << 1) | bit;
      ++cursor_;
    }
    return out;
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::uint64_t cursor_ = 0;
};

// ceil(log2(dim)): bits needed for a coordinate index in [0, dim).
inline int index_bits(std::uint64_t dim) {
  int bits = 0;
  std::uint64_t span = 1;
  while (span < dim) {
    span <<= 1;
    ++bits;
  }
  return bits;
}

}  // namespace dpcomm

#endif  // DPCOMM_TRANSCRIPT_HPP_
