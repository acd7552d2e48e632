#include "pcld/range_coder.hpp"

#include <algorithm>

#include "pcld/error.hpp"

namespace pcld {

namespace {
constexpr uint32_t kTopValue = 1u << 24;
constexpr int kTotalBits = 16;
}  // namespace

void RangeEncoder::encode(uint32_t cum, uint32_t freq) {
  uint32_t r = range_ >> kTotalBits;
  low_ += static_cast<uint64_t>(cum) * r;
  range_ = r * freq;
  while (range_ < kTopValue) {
    range_ <<= 8;
    shift_low();
  }
}

void RangeEncoder::shift_low() {
  // Bytes whose value may still change due to a carry are held back as a
  // run of 0xFF behind the cache byte.
  if (static_cast<uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    uint8_t carry = static_cast<uint8_t>(low_ >> 32);
    uint8_t out = cache_;
    do {
      bytes_.push_back(static_cast<uint8_t>(out + carry));
      out = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<uint8_t>(low_ >> 24);
  }
  ++cache_size_;
  low_ = (low_ << 8) & 0xFFFFFFFFull;
}

std::vector<uint8_t> RangeEncoder::finish() {
  for (int i = 0; i < 5; ++i) shift_low();
  return std::move(bytes_);
}

RangeDecoder::RangeDecoder(std::span<const uint8_t> bytes) : bytes_(bytes) {
  next_byte();  // leading carry-buffer byte
  for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
}

uint8_t RangeDecoder::next_byte() {
  if (pos_ >= bytes_.size()) fail("range coder: truncated payload");
  return bytes_[pos_++];
}

uint32_t RangeDecoder::decode_value() {
  uint32_t r = range_ >> kTotalBits;
  uint32_t v = code_ / r;
  return std::min(v, (1u << kTotalBits) - 1);
}

void RangeDecoder::consume(uint32_t cum, uint32_t freq) {
  uint32_t r = range_ >> kTotalBits;
  code_ -= cum * r;
  range_ = r * freq;
  while (range_ < kTopValue) {
    code_ = (code_ << 8) | next_byte();
    range_ <<= 8;
  }
}

std::vector<uint8_t> accurate_encode(std::span<const int> symbols,
                                     std::span<const int> levels, const BGrid& grid) {
  require(symbols.size() == levels.size(), "accurate_encode: level count mismatch");
  RangeEncoder enc;
  for (size_t i = 0; i < symbols.size(); ++i) {
    std::span<const uint32_t> cum = grid.cum(levels[i]);
    int s = symbols[i];
    require(s >= 0 && s < grid.alphabet(), "accurate_encode: symbol out of range");
    enc.encode(cum[s], cum[s + 1] - cum[s]);
  }
  return enc.finish();
}

std::vector<int> accurate_decode(std::span<const uint8_t> payload, size_t count,
                                 std::span<const int> levels, const BGrid& grid) {
  require(count == levels.size(), "accurate_decode: level count mismatch");
  RangeDecoder dec(payload);
  std::vector<int> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    std::span<const uint32_t> cum = grid.cum(levels[i]);
    uint32_t v = dec.decode_value();
    int s = symbol_from_cum(cum, v);
    dec.consume(cum[s], cum[s + 1] - cum[s]);
    out.push_back(s);
  }
  return out;
}

int symbol_from_cum(std::span<const uint32_t> cum, uint32_t value) {
  // cum is strictly increasing (every frequency >= 1).
  auto it = std::upper_bound(cum.begin(), cum.end(), value);
  return static_cast<int>(it - cum.begin()) - 1;
}

}  // namespace pcld
