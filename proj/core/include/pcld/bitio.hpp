#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pcld/error.hpp"

namespace pcld {

/// MSB-first bit writer.
class BitWriter {
 public:
  void put_bit(int bit) {
    acc_ = static_cast<uint8_t>((acc_ << 1) | (bit & 1));
    if (++nbits_ == 8) {
      bytes_.push_back(acc_);
      acc_ = 0;
      nbits_ = 0;
    }
    ++total_bits_;
  }

  void put_bits(uint32_t v, int n) {
    for (int i = n - 1; i >= 0; --i) put_bit(static_cast<int>((v >> i) & 1u));
  }

  size_t bit_count() const { return total_bits_; }

  /// Zero-pads the trailing partial byte.
  std::vector<uint8_t> finish() {
    if (nbits_ > 0) {
      bytes_.push_back(static_cast<uint8_t>(acc_ << (8 - nbits_)));
      acc_ = 0;
      nbits_ = 0;
    }
    return std::move(bytes_);
  }

 private:
  std::vector<uint8_t> bytes_;
  uint8_t acc_ = 0;
  int nbits_ = 0;
  size_t total_bits_ = 0;
};

/// MSB-first bit reader; throws on exhaustion.
class BitReader {
 public:
  explicit BitReader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  int get_bit() {
    size_t byte = pos_ >> 3;
    if (byte >= bytes_.size()) fail("bitstream: truncated payload");
    int bit = (bytes_[byte] >> (7 - (pos_ & 7))) & 1;
    ++pos_;
    return bit;
  }

  uint32_t get_bits(int n) {
    uint32_t v = 0;
    for (int i = 0; i < n; ++i) v = (v << 1) | static_cast<uint32_t>(get_bit());
    return v;
  }

  size_t bit_pos() const { return pos_; }

 private:
  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

}  // namespace pcld
