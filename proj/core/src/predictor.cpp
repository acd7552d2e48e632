#include "pcld/predictor.hpp"

#include <algorithm>
#include <cmath>

#include "pcld/error.hpp"
#include "pcld/linalg.hpp"

namespace pcld {

double med_predict(const Ctx4& c) {
  double lo = std::min(c.a, c.b);
  double hi = std::max(c.a, c.b);
  double mu;
  if (c.c >= hi)
    mu = lo;
  else if (c.c <= lo)
    mu = hi;
  else
    mu = c.a + c.b - c.c;
  return std::clamp(mu, 0.0, 1.0);
}

double linear_predict(const PredictorParams& p, const Ctx4& c) {
  return p.alpha[0] * c.a + p.alpha[1] * c.b + p.alpha[2] * c.c + p.alpha[3] * c.d;
}

double predict_mu(const PredictorParams& p, const Ctx4& c) {
  switch (p.kind) {
    case PredictorKind::kMed:
      return med_predict(c);
    case PredictorKind::kAvg:
      return 0.5 * c.a + 0.5 * c.b;
    case PredictorKind::kLinear:
      return linear_predict(p, c);
  }
  fail("predict_mu: unknown predictor kind");
}

PredictorParams fit_linear_predictor(std::span<const PixelSample> samples) {
  require(!samples.empty(), "fit_linear_predictor: empty sample set");
  NormalEq ne(4);
  for (const PixelSample& s : samples) {
    double row[4] = {s.ctx.a, s.ctx.b, s.ctx.c, s.ctx.d};
    ne.add(row, s.value);
  }
  std::vector<double> a = ne.solve(1e-9, "degenerate context sample");
  PredictorParams p;
  p.kind = PredictorKind::kLinear;
  std::copy_n(a.begin(), 4, p.alpha.begin());
  return p;
}

double mean_abs_error(const PredictorParams& p, std::span<const PixelSample> samples) {
  require(!samples.empty(), "mean_abs_error: empty sample set");
  double sum = 0.0;
  for (const PixelSample& s : samples) sum += std::fabs(s.value - predict_mu(p, s.ctx));
  return sum / static_cast<double>(samples.size());
}

}  // namespace pcld
