#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pcld/entropy.hpp"

namespace pcld {

/// Byte-oriented carry-counting range coder over 2^16-normalized frequency
/// tables. The encoder and decoder renormalize in lockstep, so a valid stream
/// is consumed exactly; reading past the end only happens on truncated or
/// corrupt payloads and throws.
class RangeEncoder {
 public:
  /// cum/freq from a table summing to 2^16.
  void encode(uint32_t cum, uint32_t freq);

  /// Flushes the coder state; the stream always carries a 5-byte tail, so an
  /// empty symbol sequence produces a fixed-size terminator payload.
  std::vector<uint8_t> finish();

 private:
  void shift_low();

  uint64_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint8_t cache_ = 0;
  uint64_t cache_size_ = 1;  // accounts for the leading byte
  std::vector<uint8_t> bytes_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const uint8_t> bytes);

  /// Current scaled value in [0, 2^16); locate the symbol whose cumulative
  /// interval contains it, then call consume with that symbol's (cum, freq).
  uint32_t decode_value();
  void consume(uint32_t cum, uint32_t freq);

  size_t bytes_read() const { return pos_; }

 private:
  uint8_t next_byte();

  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint32_t code_ = 0;
};

/// Encode symbols (already zig-zagged alphabet indices) against per-symbol
/// BGrid levels. The level sequence is causal metadata: the codec recomputes
/// it from decoded context on both sides.
std::vector<uint8_t> accurate_encode(std::span<const int> symbols,
                                     std::span<const int> levels, const BGrid& grid);

/// Exact inverse of accurate_encode given the same levels.
std::vector<int> accurate_decode(std::span<const uint8_t> payload, size_t count,
                                 std::span<const int> levels, const BGrid& grid);

/// Symbol lookup in a cumulative table (upper_bound - 1).
int symbol_from_cum(std::span<const uint32_t> cum, uint32_t value);

}  // namespace pcld
