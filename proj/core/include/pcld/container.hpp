#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pcld/image.hpp"
#include "pcld/predictor.hpp"
#include "pcld/width_model.hpp"

namespace pcld {

enum class ScanMode : uint8_t { kRaster = 0, kHaar = 1 };
enum class CoderKind : uint8_t { kGolomb = 0, kAccurate = 1 };

/// Encoder configuration. cycles applies to haar only (0 means "not set" and
/// is rejected for haar; any nonzero value is rejected for raster).
struct CodecConfig {
  ScanMode scan = ScanMode::kRaster;
  int cycles = 0;
  PredictorKind predictor = PredictorKind::kLinear;
  WidthKind width = WidthKind::kLin4;
  CoderKind coder = CoderKind::kGolomb;
  double kappa = 1.0;
  bool adaptive = false;
  bool share_cycles = false;
};

/// Container layout (all multi-byte integers big-endian, floats as IEEE-754
/// binary64 big-endian):
///
///   magic "PCLD", version u8 = 1
///   width u16, height u16
///   scan u8 (0 raster, 1 haar); haar: cycles u8 (effective, may be clamped)
///   predictor u8 (0 MED, 1 AVG, 2 LINEAR + 4 f64 alpha)
///   width u8 (0 SINGLE + f64 b; 1 CTX365 + 24 f64 thresholds + 365 f64 table;
///             2 LIN4 + 4 f64; 3 LIN11 + 11 f64)
///   kappa f64, coder u8, adaptive u8, symbol count u32
///   haar only: share u8, detail block count u8, then per block
///     scan type u8 (1 dH, 2 dVl, 3 dVr), det index u8 (0xFF shared),
///     d_alpha u8, d_beta u8, d_alpha f64 alpha, d_beta f64 beta
///   payload bytes
///
/// In haar mode the global predictor/width fields carry the scan-0 model
/// (LINEAR alpha over its 4-neighbor context, LIN4-shaped width beta); in
/// adaptive mode the width field is SINGLE with the EMA seed scale and no
/// width coefficients are stored anywhere.
std::vector<uint8_t> compress(const Image& img, const CodecConfig& config);

/// Exact inverse of compress. Throws Error on malformed or truncated input;
/// never returns a partial image.
Image decompress(std::span<const uint8_t> bytes);

/// Exact serialized header size in bits for a configuration (haar cycles
/// taken from the config as-is).
size_t header_size_bits(const CodecConfig& config);

/// Header length in bytes of an encoded stream (parses the header only).
size_t header_byte_length(std::span<const uint8_t> bytes);

/// Learning rate of the width EMA in adaptive mode; part of the format.
inline constexpr double kAdaptiveWidthEta = 0.98;
/// Header-declared default seed scale for adaptive mode.
inline constexpr double kAdaptiveSeedB = 0.1;

}  // namespace pcld
