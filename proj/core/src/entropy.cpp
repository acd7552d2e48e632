#include "pcld/entropy.hpp"

#include <algorithm>
#include <cmath>

#include "pcld/error.hpp"

namespace pcld {

namespace {

constexpr double kLog2E = 1.4426950408889634;

}  // namespace

int fold_residue(int value, int mu, int alphabet) {
  int half = alphabet / 2;
  int r = (value - mu + half) % alphabet;
  if (r < 0) r += alphabet;
  return r - half;
}

int unfold_residue(int residue, int mu, int alphabet) {
  int v = (residue + mu) % alphabet;
  if (v < 0) v += alphabet;
  return v;
}

unsigned zigzag(int r, int alphabet) {
  int half = alphabet / 2;
  if (r == -half) return static_cast<unsigned>(alphabet - 1);  // mirror of +half is unused
  return r > 0 ? static_cast<unsigned>(2 * r - 1) : static_cast<unsigned>(-2 * r);
}

int unzigzag(unsigned u, int alphabet) {
  if (u == static_cast<unsigned>(alphabet - 1)) return -alphabet / 2;
  return (u & 1u) ? static_cast<int>((u + 1) / 2) : -static_cast<int>(u / 2);
}

void golomb_encode(BitWriter& bw, unsigned u, int m) {
  unsigned q = u >> m;
  if (q >= kGolombEscapeQuotient) {
    for (int i = 0; i < kGolombEscapeQuotient; ++i) bw.put_bit(0);
    bw.put_bits(u, kGolombEscapeRawBits);
    return;
  }
  for (unsigned i = 0; i < q; ++i) bw.put_bit(0);
  bw.put_bit(1);
  if (m > 0) bw.put_bits(u & ((1u << m) - 1u), m);
}

unsigned golomb_decode(BitReader& br, int m) {
  unsigned q = 0;
  while (q < kGolombEscapeQuotient) {
    if (br.get_bit()) break;
    ++q;
  }
  if (q == kGolombEscapeQuotient) return br.get_bits(kGolombEscapeRawBits);
  return (q << m) | br.get_bits(m);
}

int golomb_bits(unsigned u, int m) {
  unsigned q = u >> m;
  if (q >= kGolombEscapeQuotient) return kGolombEscapeQuotient + kGolombEscapeRawBits;
  return static_cast<int>(q) + 1 + m;
}

int golomb_bits_two_bit_unary(unsigned u, int m) {
  return 2 * static_cast<int>(u >> m) + 1 + m;
}

int optimal_m(double b_int, int alphabet) {
  require(b_int > 0.0, "optimal_m: b must be positive");
  std::vector<double> p = discretize_laplace(b_int, alphabet);
  int best_m = 0;
  double best = 0.0;
  for (int m = 0; m <= 15; ++m) {
    double expected = 0.0;
    for (int u = 0; u < alphabet; ++u)
      expected += p[u] * golomb_bits(static_cast<unsigned>(u), m);
    if (m == 0 || expected < best) {
      best = expected;
      best_m = m;
    }
  }
  return best_m;
}

std::vector<double> discretize_laplace(double b_int, int alphabet) {
  require(b_int > 0.0, "discretize_laplace: b must be positive");
  int half = alphabet / 2;
  std::vector<double> p(alphabet, 0.0);
  // Masses are evaluated from the magnitude side so p(r) and p(-r) run the
  // same float operations; the 1 - 0.5 exp(..) branch of the CDF cancels
  // catastrophically in the tail.
  double step = -std::expm1(-1.0 / b_int);  // 1 - e^(-1/b)
  double sum = 0.0;
  for (int u = 0; u < alphabet; ++u) {
    int r = unzigzag(static_cast<unsigned>(u), alphabet);
    double mass;
    if (r == 0) {
      mass = -std::expm1(-0.5 / b_int);
    } else {
      double ar = std::fabs(static_cast<double>(r));
      double outer = 0.5 * std::exp(-(ar - 0.5) / b_int);
      // The extreme slots (r = -half and r = half-1) absorb their whole tail.
      bool tail_slot = (r == -half) || (r == half - 1);
      mass = tail_slot ? outer : outer * step;
    }
    p[u] = mass;
    sum += mass;
  }
  for (double& v : p) v /= sum;
  return p;
}

double log2_residue_prob(int r, double b_int, int alphabet) {
  require(b_int > 0.0, "log2_residue_prob: b must be positive");
  int half = alphabet / 2;
  require(r >= -half && r < half, "log2_residue_prob: residue out of range");
  double ar = std::fabs(static_cast<double>(r));
  // Work in log space: the straight CDF differences underflow for large |r|/b.
  if (r == 0) {
    return std::log2(1.0 - std::exp(-0.5 / b_int));
  }
  if (r == -half || r == half - 1) {
    // Tail slot: mass 0.5 * exp(-(|r|-1/2)/b).
    return -1.0 - (ar - 0.5) / b_int * kLog2E;
  }
  // 0.5 * exp(-(|r|-1/2)/b) * (1 - exp(-1/b))
  return -1.0 - (ar - 0.5) / b_int * kLog2E + std::log2(-std::expm1(-1.0 / b_int));
}

double code_cost_bits(std::span<const double> p, std::span<const int> symbols) {
  double bits = 0.0;
  for (int s : symbols) {
    require(s >= 0 && static_cast<size_t>(s) < p.size(), "code_cost_bits: symbol out of range");
    require(p[s] > 0.0, "code_cost_bits: zero-probability symbol");
    bits -= std::log2(p[s]);
  }
  return bits;
}

std::vector<PenaltyPoint> golomb_penalty_curve(std::span<const double> b_grid, int alphabet) {
  std::vector<PenaltyPoint> out;
  out.reserve(b_grid.size());
  for (double b : b_grid) {
    std::vector<double> p = discretize_laplace(b, alphabet);
    int m = optimal_m(b, alphabet);
    PenaltyPoint pt;
    pt.b = b;
    for (int u = 0; u < alphabet; ++u) {
      pt.golomb_bits += p[u] * golomb_bits(static_cast<unsigned>(u), m);
      pt.golomb_bits_two_bit_unary += p[u] * golomb_bits_two_bit_unary(static_cast<unsigned>(u), m);
      if (p[u] > 0.0) pt.entropy_bits -= p[u] * std::log2(p[u]);
    }
    out.push_back(pt);
  }
  return out;
}

BGrid::BGrid(int alphabet, double b_min, double b_max)
    : alphabet_(alphabet), b_min_(b_min), b_max_(b_max) {
  require(alphabet > 1 && b_min > 0 && b_max > b_min, "BGrid: bad parameters");
  levels_.resize(kLevels);
  double ratio = std::log(b_max / b_min);
  for (int i = 0; i < kLevels; ++i)
    levels_[i] = b_min * std::exp(ratio * static_cast<double>(i) / (kLevels - 1));

  freq_.assign(static_cast<size_t>(kLevels) * alphabet, 0);
  cum_.assign(static_cast<size_t>(kLevels) * (alphabet + 1), 0);
  golomb_m_.resize(kLevels);

  for (int lvl = 0; lvl < kLevels; ++lvl) {
    std::vector<double> p = discretize_laplace(levels_[lvl], alphabet);
    uint32_t* f = &freq_[static_cast<size_t>(lvl) * alphabet];
    int64_t total = 0;
    for (int u = 0; u < alphabet; ++u) {
      int64_t q = std::llround(p[u] * static_cast<double>(kTotalFreq));
      f[u] = static_cast<uint32_t>(std::max<int64_t>(1, q));
      total += f[u];
    }
    // Fix the sum to exactly 2^16, adjusting the most probable symbols first
    // (smallest index wins ties) so both codec sides build the same table.
    while (total != kTotalFreq) {
      int arg = 0;
      for (int u = 1; u < alphabet; ++u)
        if (f[u] > f[arg]) arg = u;
      if (total < kTotalFreq) {
        f[arg] += static_cast<uint32_t>(kTotalFreq - total);
        total = kTotalFreq;
      } else {
        int64_t take = std::min<int64_t>(total - kTotalFreq, f[arg] - 1);
        f[arg] -= static_cast<uint32_t>(take);
        total -= take;
      }
    }
    uint32_t* c = &cum_[static_cast<size_t>(lvl) * (alphabet + 1)];
    c[0] = 0;
    for (int u = 0; u < alphabet; ++u) c[u + 1] = c[u] + f[u];
    golomb_m_[lvl] = optimal_m(levels_[lvl], alphabet);
  }
}

const BGrid& BGrid::raster() {
  static const BGrid g(kRasterAlphabet, 0.05, 128.0);
  return g;
}

const BGrid& BGrid::detail() {
  static const BGrid g(kDetailAlphabet, 0.1, 256.0);
  return g;
}

int BGrid::level_for(double b_int) const {
  double b = std::clamp(b_int, b_min_, b_max_);
  double x = std::log(b / b_min_) / std::log(b_max_ / b_min_) * (kLevels - 1);
  int idx = static_cast<int>(std::lround(x));
  return std::clamp(idx, 0, kLevels - 1);
}

std::span<const uint32_t> BGrid::freq(int level) const {
  return {&freq_[static_cast<size_t>(level) * alphabet_], static_cast<size_t>(alphabet_)};
}

std::span<const uint32_t> BGrid::cum(int level) const {
  return {&cum_[static_cast<size_t>(level) * (alphabet_ + 1)], static_cast<size_t>(alphabet_) + 1};
}

}  // namespace pcld
