#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pcld/bitio.hpp"

namespace pcld {

/// Residue alphabets: 256 for the 8-bit raster path, 512 for haar detail
/// streams. The residue range for alphabet N is [-N/2, N/2-1].
inline constexpr int kRasterAlphabet = 256;
inline constexpr int kDetailAlphabet = 512;

/// Mod-N folded prediction error; exact inverse of unfold_residue.
int fold_residue(int value, int mu, int alphabet = kRasterAlphabet);
int unfold_residue(int residue, int mu, int alphabet = kRasterAlphabet);

/// Signed-to-unsigned bijection in 0,1,-1,2,-2,... order. The unrepresentable
/// mirror of -N/2 is remapped into the otherwise unused top slot N-1.
unsigned zigzag(int r, int alphabet = kRasterAlphabet);
int unzigzag(unsigned u, int alphabet = kRasterAlphabet);

/// Power-of-2 Golomb code: floor(u/2^m) zeros, a one, m low bits of u.
/// Quotients >= 24 escape to 24 zeros followed by 9 raw bits (covers the
/// full 512-wide detail alphabet).
inline constexpr int kGolombEscapeQuotient = 24;
inline constexpr int kGolombEscapeRawBits = 9;

void golomb_encode(BitWriter& bw, unsigned u, int m);
unsigned golomb_decode(BitReader& br, int m);

/// True emitted length of golomb_encode.
int golomb_bits(unsigned u, int m);

/// The alternative 2*floor(u/M)+1+m accounting (two bits per unary digit);
/// reported by the analytics alongside the implemented length.
int golomb_bits_two_bit_unary(unsigned u, int m);

/// argmin over m in [0,15] of the expected Golomb length under the zig-zagged
/// discretized Laplace of scale b_int; ties resolve to the smaller m.
int optimal_m(double b_int, int alphabet = kRasterAlphabet);

/// Probability vector over the residue alphabet, indexed by zigzag(r):
/// p(r) = F(r+1/2) - F(r-1/2) for the centered Laplace CDF of scale b_int,
/// with tail mass folded into the extreme slots, normalized to 1.
std::vector<double> discretize_laplace(double b_int, int alphabet = kRasterAlphabet);

/// Closed-form log2 probability of residue r under the same discretization
/// (tails included); used by the ideal-cost evaluation path.
double log2_residue_prob(int r, double b_int, int alphabet = kRasterAlphabet);

/// Sum of -log2 p(s) over the symbol stream; throws on a zero-probability
/// symbol.
double code_cost_bits(std::span<const double> p, std::span<const int> symbols);

struct PenaltyPoint {
  double b = 0;
  double golomb_bits = 0;             // expected bits under optimal_m
  double golomb_bits_two_bit_unary = 0;  // expected bits under the 2q+1+m reading
  double entropy_bits = 0;            // Shannon entropy of the discretized Laplace
};

/// Expected Golomb length vs entropy over a grid of b values (the coding
/// penalty curve).
std::vector<PenaltyPoint> golomb_penalty_curve(std::span<const double> b_grid,
                                               int alphabet = kRasterAlphabet);

/// 64 geometric scale levels with 2^16-normalized frequency tables per level
/// (every symbol keeps frequency >= 1) plus the per-level optimal Golomb m.
/// Both codec sides construct identical grids from the same constants.
class BGrid {
 public:
  static constexpr int kLevels = 64;
  static constexpr uint32_t kTotalFreq = 1u << 16;

  BGrid(int alphabet, double b_min, double b_max);

  static const BGrid& raster();  // alphabet 256, b in [0.05, 128]
  static const BGrid& detail();  // alphabet 512, b in [0.1, 256]

  int alphabet() const { return alphabet_; }
  double level_b(int level) const { return levels_[level]; }

  /// Nearest level in log space, clamped to [0, 63].
  int level_for(double b_int) const;

  std::span<const uint32_t> freq(int level) const;
  /// Cumulative frequencies, alphabet+1 entries, cum[alphabet] == 2^16.
  std::span<const uint32_t> cum(int level) const;
  int golomb_m(int level) const { return golomb_m_[level]; }

 private:
  int alphabet_;
  double b_min_, b_max_;
  std::vector<double> levels_;
  std::vector<uint32_t> freq_;  // kLevels * alphabet
  std::vector<uint32_t> cum_;   // kLevels * (alphabet+1)
  std::vector<int> golomb_m_;
};

}  // namespace pcld
