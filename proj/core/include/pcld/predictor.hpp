#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "pcld/image.hpp"

namespace pcld {

enum class PredictorKind : uint8_t { kMed = 0, kAvg = 1, kLinear = 2 };

/// Center model mu(c). For kLinear, mu = alpha . (A,B,C,D); kAvg is the fixed
/// special case alpha = (1/2, 1/2, 0, 0).
struct PredictorParams {
  PredictorKind kind = PredictorKind::kMed;
  std::array<double, 4> alpha{0, 0, 0, 0};
};

/// One training observation: causal context plus the normalized pixel value.
struct PixelSample {
  Ctx4 ctx;
  double value = 0;  // x/255
};

/// LOCO-I median edge detector, clamped to [0,1].
double med_predict(const Ctx4& c);

/// alpha . (A,B,C,D); intentionally unclamped (clamping happens at
/// integerization).
double linear_predict(const PredictorParams& p, const Ctx4& c);

/// Dispatch over the predictor kind.
double predict_mu(const PredictorParams& p, const Ctx4& c);

/// Least-squares fit of alpha over (A,B,C,D). A 1e-9 ridge keeps the solve
/// defined on degenerate (e.g. constant) inputs.
PredictorParams fit_linear_predictor(std::span<const PixelSample> samples);

/// Mean |x - mu(c)| over the samples, in normalized units.
double mean_abs_error(const PredictorParams& p, std::span<const PixelSample> samples);

}  // namespace pcld
