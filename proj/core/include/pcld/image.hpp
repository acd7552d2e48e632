#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pcld {

/// 8-bit grayscale raster, row-major.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;

  Image() = default;
  Image(int w, int h, uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<size_t>(w) * h, fill) {}

  int at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
  void set(int x, int y, int v) { pixels[static_cast<size_t>(y) * width + x] = static_cast<uint8_t>(v); }
  size_t size() const { return pixels.size(); }

  bool operator==(const Image&) const = default;
};

/// Four causal neighbors normalized to [0,1]:
/// A = left, B = up, C = up-left, D = up-right.
struct Ctx4 {
  double a = 0, b = 0, c = 0, d = 0;
};

/// Parse a binary PGM (P5, maxval 255). Throws Error naming the byte offset
/// on malformed input.
Image read_pgm(std::span<const uint8_t> bytes);

/// Serialize to binary PGM. read_pgm(write_pgm(img)) == img.
std::vector<uint8_t> write_pgm(const Image& img);

/// Causal 4-neighbor context at (x,y), /255 normalized, with the border rule:
///   (0,0)          -> all components 0.5
///   y==0, x>0      -> all components = left neighbor
///   x==0 (y>0)     -> A:=B, C:=B
///   x==width-1     -> D:=B
/// Never consults pixels at or after (x,y) in raster order.
Ctx4 context_at(const Image& img, int x, int y);

}  // namespace pcld
