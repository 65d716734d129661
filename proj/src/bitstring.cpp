// SPDX-License-Identifier: Apache-2.0
#include "prext/bitstring.hpp"

#include <bit>
#include <stdexcept>

namespace prext {

namespace {
constexpr std::uint64_t kTopBit = 1ULL << 63;

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

void BitString::check_index(std::size_t i) const {
  if (i >= len_) throw std::invalid_argument("BitString: index out of range");
}

bool BitString::get(std::size_t i) const {
  check_index(i);
  return (words_[i / 64] >> (63 - (i % 64))) & 1ULL;
}

void BitString::set(std::size_t i, bool v) {
  check_index(i);
  const std::uint64_t mask = kTopBit >> (i % 64);
  if (v)
    words_[i / 64] |= mask;
  else
    words_[i / 64] &= ~mask;
}

BitString BitString::from_value(std::uint64_t value, std::size_t len) {
  if (len < 64 && len > 0 && (value >> len) != 0)
    throw std::invalid_argument("BitString: value does not fit in length");
  BitString out(len);
  for (std::size_t j = 0; j < len && j < 64; ++j)
    out.set(len - 1 - j, (value >> j) & 1ULL);
  return out;
}

BitString BitString::from_hex(const std::string& hex, std::size_t len) {
  const std::size_t digits = (len + 3) / 4;
  std::string s = hex;
  if (s.rfind("0x", 0) == 0 || s.rfind("0X", 0) == 0) s = s.substr(2);
  if (s.size() != digits)
    throw std::invalid_argument("BitString: hex length mismatch");
  BitString out(len);
  // The hex string is the big-endian value; bit (len-1) is the value's
  // least significant bit.
  for (std::size_t k = 0; k < digits; ++k) {
    const int v = hex_digit(s[digits - 1 - k]);
    if (v < 0) throw std::invalid_argument("BitString: bad hex digit");
    for (int b = 0; b < 4; ++b) {
      const std::size_t pos_from_lsb = 4 * k + static_cast<std::size_t>(b);
      if (pos_from_lsb >= len) {
        if ((v >> b) & 1)
          throw std::invalid_argument("BitString: hex value does not fit");
        continue;
      }
      out.set(len - 1 - pos_from_lsb, (v >> b) & 1);
    }
  }
  return out;
}

BitString BitString::from_bytes(const std::vector<std::uint8_t>& bytes,
                                std::size_t len) {
  if (len > bytes.size() * 8)
    throw std::invalid_argument("BitString: not enough bytes");
  BitString out(len);
  for (std::size_t i = 0; i < len; ++i)
    out.set(i, (bytes[i / 8] >> (7 - (i % 8))) & 1);
  return out;
}

BitString BitString::random(SplitMix64& rng, std::size_t len) {
  BitString out(len);
  for (auto& w : out.words_) w = rng.next_u64();
  const std::size_t tail = len % 64;
  if (tail != 0 && !out.words_.empty())
    out.words_.back() &= ~0ULL << (64 - tail);
  return out;
}

bool BitString::inner_product(const BitString& other) const {
  if (len_ != other.len_)
    throw std::invalid_argument("BitString: inner product length mismatch");
  std::uint64_t acc = 0;
  for (std::size_t w = 0; w < words_.size(); ++w)
    acc ^= words_[w] & other.words_[w];
  return (std::popcount(acc) & 1) != 0;
}

void BitString::xor_assign(const BitString& other) {
  if (len_ != other.len_)
    throw std::invalid_argument("BitString: xor length mismatch");
  for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= other.words_[w];
}

BitString BitString::slice(std::size_t start, std::size_t len) const {
  if (start + len > len_)
    throw std::invalid_argument("BitString: slice out of range");
  BitString out(len);
  for (std::size_t i = 0; i < len; ++i) out.set(i, get(start + i));
  return out;
}

void BitString::append(const BitString& tail) {
  const std::size_t old = len_;
  len_ += tail.len_;
  words_.resize(word_count(len_), 0);
  for (std::size_t i = 0; i < tail.len_; ++i) set(old + i, tail.get(i));
}

void BitString::append_bit(bool v) {
  ++len_;
  words_.resize(word_count(len_), 0);
  set(len_ - 1, v);
}

std::size_t BitString::count_ones() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::string BitString::to_hex() const {
  const std::size_t digits = (len_ + 3) / 4;
  std::string out(digits, '0');
  for (std::size_t k = 0; k < digits; ++k) {
    int v = 0;
    for (int b = 0; b < 4; ++b) {
      const std::size_t pos_from_lsb = 4 * k + static_cast<std::size_t>(b);
      if (pos_from_lsb < len_ && get(len_ - 1 - pos_from_lsb)) v |= 1 << b;
    }
    out[digits - 1 - k] = "0123456789abcdef"[v];
  }
  return out;
}

std::string BitString::to_string01() const {
  std::string out(len_, '0');
  for (std::size_t i = 0; i < len_; ++i)
    if (get(i)) out[i] = '1';
  return out;
}

std::vector<std::uint8_t> BitString::to_bytes() const {
  std::vector<std::uint8_t> out((len_ + 7) / 8, 0);
  for (std::size_t i = 0; i < len_; ++i)
    if (get(i)) out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  return out;
}

std::uint64_t BitString::fnv1a() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      h ^= (x >> (8 * i)) & 0xFF;
      h *= 1099511628211ULL;
    }
  };
  feed(len_);
  for (auto w : words_) feed(w);
  return h;
}

}  // namespace prext
