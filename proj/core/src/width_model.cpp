#include "pcld/width_model.hpp"

#include <algorithm>
#include <cmath>

#include "pcld/error.hpp"
#include "pcld/linalg.hpp"

namespace pcld {

namespace {

constexpr double kMinB = 0.001;
constexpr double kMinTheta = 1e-6;
constexpr double kShrinkCount = 2.0;  // pseudo-observations toward global b

inline std::array<double, 3> ctx_diffs(const Ctx4& c) {
  return {c.c - c.a, c.b - c.c, c.d - c.b};
}

// Level of one signed difference given the 4 positive thresholds of its
// channel; sign-equivariant by construction (level(-d) == -level(d)).
inline int diff_level(double d, const std::array<double, 8>& th) {
  double ad = std::fabs(d);
  int lvl = 0;
  for (int j = 4; j < 8; ++j)
    if (ad > th[j]) ++lvl;
  if (d < 0) return -lvl;
  if (d > 0) return lvl;
  return 0;
}

}  // namespace

std::array<double, 4> basis_b4(const Ctx4& c) {
  std::array<double, 3> d = ctx_diffs(c);
  return {1.0, std::pow(std::fabs(d[0]), 0.8), std::pow(std::fabs(d[1]), 0.8),
          std::pow(std::fabs(d[2]), 0.8)};
}

std::array<double, 11> basis_b11(const Ctx4& c) {
  std::array<double, 4> b4 = basis_b4(c);
  auto p4 = [](double x) {
    double y = (x - 0.5) * (x - 0.5);
    return y * y;
  };
  return {b4[0],
          b4[1],
          b4[2],
          b4[3],
          p4(c.a),
          p4(c.b),
          p4(c.c),
          p4(c.d),
          std::pow(std::fabs(c.c - 2.0 * c.b + c.d), 0.1),
          std::pow(std::fabs(c.a - 2.0 * c.c + c.b), 0.1)};
}

int width_basis_dim(WidthKind kind) {
  switch (kind) {
    case WidthKind::kLin4:
      return 4;
    case WidthKind::kLin11:
      return 11;
    default:
      return 0;
  }
}

double predict_b(const WidthModel& m, const Ctx4& c) {
  switch (m.kind) {
    case WidthKind::kSingle:
      return std::max(m.single_b, kMinB);
    case WidthKind::kCtx365:
      return std::max(m.table[quantize_ctx(m.thresholds, c).index], kMinB);
    case WidthKind::kLin4: {
      std::array<double, 4> g = basis_b4(c);
      double theta = dot(m.beta, g);
      if (m.kappa == 1.0) return std::max(theta, kMinB);
      return std::pow(std::max(theta, kMinTheta), 1.0 / m.kappa);
    }
    case WidthKind::kLin11: {
      std::array<double, 11> g = basis_b11(c);
      double theta = dot(m.beta, g);
      if (m.kappa == 1.0) return std::max(theta, kMinB);
      return std::pow(std::max(theta, kMinTheta), 1.0 / m.kappa);
    }
  }
  fail("predict_b: unknown width kind");
}

QuantizedCtx quantize_ctx(const Thresholds& th, const Ctx4& c) {
  std::array<double, 3> d = ctx_diffs(c);
  int lvl[3];
  for (int ch = 0; ch < 3; ++ch) lvl[ch] = diff_level(d[ch], th.t[ch]);

  int sign = 1;
  for (int ch = 0; ch < 3; ++ch) {
    if (lvl[ch] != 0) {
      if (lvl[ch] < 0) {
        sign = -1;
        for (int k = 0; k < 3; ++k) lvl[k] = -lvl[k];
      }
      break;
    }
  }
  // Canonical triples (first nonzero level positive, or all-zero) occupy
  // exactly the codes >= 364 in base-9 order, so the rank is code - 364.
  int code = (lvl[0] + 4) * 81 + (lvl[1] + 4) * 9 + (lvl[2] + 4);
  return {code - 364, sign};
}

Thresholds fit_thresholds(std::span<const Ctx4> contexts) {
  require(!contexts.empty(), "fit_thresholds: empty sample set");
  Thresholds out;
  std::vector<double> diffs(contexts.size());
  for (int ch = 0; ch < 3; ++ch) {
    for (size_t i = 0; i < contexts.size(); ++i) diffs[i] = ctx_diffs(contexts[i])[ch];
    std::sort(diffs.begin(), diffs.end());
    size_t n = diffs.size();
    double q[9];
    for (int k = 1; k <= 8; ++k)
      q[k] = diffs[std::min(n - 1, (static_cast<size_t>(k) * n) / 9)];
    // Symmetrize outer-in; ordering is preserved because each pair brackets
    // the next.
    double m[5];
    for (int k = 1; k <= 4; ++k) m[k] = std::max(std::fabs(q[k]), std::fabs(q[9 - k]));
    out.t[ch] = {-m[1], -m[2], -m[3], -m[4], m[4], m[3], m[2], m[1]};
  }
  return out;
}

WidthModel fit_ctx365(const Thresholds& th, std::span<const WidthSample> samples) {
  require(!samples.empty(), "fit_ctx365: empty sample set");
  double global_sum = 0.0;
  std::array<double, kCtxClasses> sum{};
  std::array<double, kCtxClasses> count{};
  for (const WidthSample& s : samples) {
    QuantizedCtx q = quantize_ctx(th, s.ctx);
    sum[q.index] += s.abs_residue;
    count[q.index] += 1.0;
    global_sum += s.abs_residue;
  }
  double b_global = global_sum / static_cast<double>(samples.size());
  WidthModel m;
  m.kind = WidthKind::kCtx365;
  m.thresholds = th;
  m.table.resize(kCtxClasses);
  for (int k = 0; k < kCtxClasses; ++k)
    m.table[k] = (sum[k] + kShrinkCount * b_global) / (count[k] + kShrinkCount);
  return m;
}

WidthModel epd_fit(WidthKind basis, std::span<const WidthSample> samples, double kappa) {
  int d = width_basis_dim(basis);
  require(d > 0, "epd_fit: basis must be kLin4 or kLin11");
  require(!samples.empty(), "epd_fit: empty sample set");
  require(kappa > 0.0, "epd_fit: kappa must be positive");
  NormalEq ne(d);
  for (const WidthSample& s : samples) {
    double target = (kappa == 1.0) ? s.abs_residue : std::pow(s.abs_residue, kappa);
    if (basis == WidthKind::kLin4) {
      ne.add(basis_b4(s.ctx), target);
    } else {
      ne.add(basis_b11(s.ctx), target);
    }
  }
  WidthModel m;
  m.kind = basis;
  m.kappa = kappa;
  m.beta = ne.solve(1e-9, "degenerate context sample");
  return m;
}

WidthModel fit_linear_width(WidthKind basis, std::span<const WidthSample> samples) {
  return epd_fit(basis, samples, 1.0);
}

std::pair<double, double> laplace_mle(std::span<const double> values) {
  require(!values.empty(), "laplace_mle: empty sample set");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double mu = sorted[(sorted.size() - 1) / 2];  // lower median
  double sum = 0.0;
  for (double v : values) sum += std::fabs(v - mu);
  return {mu, sum / static_cast<double>(values.size())};
}

double epd_scale(std::span<const double> abs_residues, double kappa) {
  require(!abs_residues.empty(), "epd_scale: empty sample set");
  double sum = 0.0;
  if (kappa == 1.0) {
    for (double r : abs_residues) sum += r;
    return sum / static_cast<double>(abs_residues.size());
  }
  for (double r : abs_residues) sum += std::pow(r, kappa);
  return std::pow(sum / static_cast<double>(abs_residues.size()), 1.0 / kappa);
}

}  // namespace pcld
