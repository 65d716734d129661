// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "prext/rng.hpp"

namespace prext {

// Fixed-length binary string.  Bit 0 is the most significant / leftmost
// bit; storage bits past size() are kept zero so whole-word operations
// (inner products, XOR) need no per-call masking.
class BitString {
public:
  BitString() = default;
  explicit BitString(std::size_t len) : len_(len), words_(word_count(len), 0) {}

  // Low `len` bits of `value`, most significant first ("binary(i)").
  static BitString from_value(std::uint64_t value, std::size_t len);
  // Big-endian hex; the string must have ceil(len/4) digits.
  static BitString from_hex(const std::string& hex, std::size_t len);
  static BitString from_bytes(const std::vector<std::uint8_t>& bytes,
                              std::size_t len);
  static BitString random(SplitMix64& rng, std::size_t len);

  std::size_t size() const { return len_; }
  bool empty() const { return len_ == 0; }

  bool get(std::size_t i) const;
  void set(std::size_t i, bool v);

  // Parity of the bitwise AND; both strings must have equal length.
  bool inner_product(const BitString& other) const;

  void xor_assign(const BitString& other);
  BitString slice(std::size_t start, std::size_t len) const;
  void append(const BitString& tail);
  void append_bit(bool v);

  std::size_t count_ones() const;

  std::string to_hex() const;
  std::string to_string01() const;
  std::vector<std::uint8_t> to_bytes() const;  // zero-padded to full bytes

  bool operator==(const BitString& other) const {
    return len_ == other.len_ && words_ == other.words_;
  }
  bool operator!=(const BitString& other) const { return !(*this == other); }

  // FNV-1a over length and payload, for config hashes and transcripts.
  std::uint64_t fnv1a() const;

private:
  static std::size_t word_count(std::size_t len) { return (len + 63) / 64; }
  void check_index(std::size_t i) const;

  std::size_t len_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace prext
