#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pcld/image.hpp"

namespace pcld {

enum class WidthKind : uint8_t { kSingle = 0, kCtx365 = 1, kLin4 = 2, kLin11 = 3 };

/// Quantization thresholds for the three context difference channels
/// (C-A, B-C, D-B), 8 ascending sign-symmetric values per channel.
struct Thresholds {
  std::array<std::array<double, 8>, 3> t{};
};

/// Result of mapping a context into one of the 365 sign-merged classes.
/// sign=-1 means the class was canonicalized by negating the differences;
/// the coded residue is sign-flipped for such contexts.
struct QuantizedCtx {
  int index = 0;  // [0, 364]
  int sign = 1;   // +1 or -1
};

inline constexpr int kCtxClasses = 365;  // (9^3+1)/2

/// Laplace scale model b(c). kappa generalizes to the exponential power
/// family: linear predictions are theta = b^kappa, kappa=1 is plain Laplace.
struct WidthModel {
  WidthKind kind = WidthKind::kSingle;
  double kappa = 1.0;
  double single_b = 0.0;       // kSingle
  Thresholds thresholds;       // kCtx365
  std::vector<double> table;   // kCtx365: 365 entries
  std::vector<double> beta;    // kLin4: 4, kLin11: 11
};

/// One width-fit observation: context plus |residue| in normalized units.
struct WidthSample {
  Ctx4 ctx;
  double abs_residue = 0;
};

/// (1, |C-A|^0.8, |B-C|^0.8, |D-B|^0.8)
std::array<double, 4> basis_b4(const Ctx4& c);

/// basis_b4 followed by (A-1/2)^4, (B-1/2)^4, (C-1/2)^4, (D-1/2)^4,
/// |C-2B+D|^0.1, |A-2C+B|^0.1.
std::array<double, 11> basis_b11(const Ctx4& c);

int width_basis_dim(WidthKind kind);

/// Laplace scale for a context; always > 0 (clamped at 0.001, and via
/// max(theta, 1e-6)^(1/kappa) on the exponential-power path).
double predict_b(const WidthModel& m, const Ctx4& c);

/// Map the signed differences (C-A, B-C, D-B) to levels in {-4..4} and merge
/// sign-mirrored triples; index ranks the canonical triple among the 365
/// classes.
QuantizedCtx quantize_ctx(const Thresholds& th, const Ctx4& c);

/// Per-channel empirical quantiles at k/9, symmetrized to +-max(|q_k|,|q_{9-k}|).
Thresholds fit_thresholds(std::span<const Ctx4> contexts);

/// Per-class mean |r| with shrinkage toward the global mean:
/// table[k] = (sum_k |r| + n0*b_global) / (count_k + n0), n0 = 2.
WidthModel fit_ctx365(const Thresholds& th, std::span<const WidthSample> samples);

/// Least squares of |r| on the basis functions, ridge 1e-9.
WidthModel fit_linear_width(WidthKind basis, std::span<const WidthSample> samples);

/// Least squares of |r|^kappa on the basis; predictions are theta = b^kappa.
/// kappa=1 is bit-identical to fit_linear_width.
WidthModel epd_fit(WidthKind basis, std::span<const WidthSample> samples, double kappa);

/// Laplace MLE: mu = lower median, b = mean |x - mu|.
std::pair<double, double> laplace_mle(std::span<const double> values);

/// Exponential-power scale MLE for centered data: (mean |r|^kappa)^(1/kappa).
double epd_scale(std::span<const double> abs_residues, double kappa);

}  // namespace pcld
