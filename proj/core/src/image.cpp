#include "pcld/image.hpp"

#include <string>

#include "pcld/error.hpp"

namespace pcld {

namespace {

struct TokenReader {
  std::span<const uint8_t> bytes;
  size_t pos = 0;

  static bool is_space(uint8_t c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
  }

  // Skips whitespace and '#' comments (to end of line).
  void skip_separators() {
    while (pos < bytes.size()) {
      if (is_space(bytes[pos])) {
        ++pos;
      } else if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  }

  long read_number(const char* what) {
    skip_separators();
    if (pos >= bytes.size() || bytes[pos] < '0' || bytes[pos] > '9')
      fail(std::string("pgm: expected ") + what + " at offset " + std::to_string(pos));
    long v = 0;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
      v = v * 10 + (bytes[pos] - '0');
      if (v > 1 << 28) fail(std::string("pgm: ") + what + " out of range at offset " + std::to_string(pos));
      ++pos;
    }
    return v;
  }
};

}  // namespace

Image read_pgm(std::span<const uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
    fail("pgm: bad magic at offset 0 (expected P5)");
  TokenReader r{bytes, 2};
  long w = r.read_number("width");
  long h = r.read_number("height");
  long maxval = r.read_number("maxval");
  if (w <= 0 || h <= 0)
    fail("pgm: non-positive dimensions at offset " + std::to_string(r.pos));
  if (maxval != 255)
    fail("pgm: unsupported maxval " + std::to_string(maxval) + " at offset " + std::to_string(r.pos));
  // Exactly one whitespace byte separates the header from the raster.
  if (r.pos >= bytes.size() || !TokenReader::is_space(bytes[r.pos]))
    fail("pgm: missing raster separator at offset " + std::to_string(r.pos));
  ++r.pos;
  size_t need = static_cast<size_t>(w) * static_cast<size_t>(h);
  if (bytes.size() - r.pos < need)
    fail("pgm: truncated raster at offset " + std::to_string(bytes.size()) +
         " (need " + std::to_string(need) + " bytes from offset " + std::to_string(r.pos) + ")");
  Image img(static_cast<int>(w), static_cast<int>(h));
  std::copy_n(bytes.begin() + r.pos, need, img.pixels.begin());
  return img;
}

std::vector<uint8_t> write_pgm(const Image& img) {
  std::string header = "P5\n" + std::to_string(img.width) + " " +
                       std::to_string(img.height) + "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

Ctx4 context_at(const Image& img, int x, int y) {
  require(x >= 0 && x < img.width && y >= 0 && y < img.height,
          "context_at: position outside image");
  constexpr double kInv = 1.0 / 255.0;
  if (y == 0) {
    if (x == 0) return {0.5, 0.5, 0.5, 0.5};
    double left = img.at(x - 1, 0) * kInv;
    return {left, left, left, left};
  }
  double b = img.at(x, y - 1) * kInv;
  double a = (x > 0) ? img.at(x - 1, y) * kInv : b;
  double c = (x > 0) ? img.at(x - 1, y - 1) * kInv : b;
  double d = (x < img.width - 1) ? img.at(x + 1, y - 1) * kInv : b;
  return {a, b, c, d};
}

}  // namespace pcld
