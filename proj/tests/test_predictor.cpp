#include <doctest.h>

#include <cmath>
#include <vector>

#include "pcld/predictor.hpp"
#include "test_util.hpp"

using namespace pcld;
using testutil::Rng;

namespace {

std::vector<PixelSample> linear_samples(Rng& rng, int n, const std::array<double, 4>& gen) {
  std::vector<PixelSample> s;
  for (int i = 0; i < n; ++i) {
    Ctx4 c = testutil::random_ctx(rng);
    s.push_back({c, gen[0] * c.a + gen[1] * c.b + gen[2] * c.c + gen[3] * c.d});
  }
  return s;
}

double sse(const PredictorParams& p, const std::vector<PixelSample>& s) {
  double sum = 0;
  for (const PixelSample& it : s) {
    double e = it.value - linear_predict(p, it.ctx);
    sum += e * e;
  }
  return sum;
}

}  // namespace

TEST_SUITE("predict") {

TEST_CASE("med_predict branches") {
  CHECK(med_predict({0.2, 0.5, 0.6, 0.9}) == doctest::Approx(0.2));  // C >= max
  CHECK(med_predict({0.2, 0.5, 0.1, 0.9}) == doctest::Approx(0.5));  // C <= min
  CHECK(med_predict({0.2, 0.5, 0.3, 0.9}) == doctest::Approx(0.4));  // A+B-C
}

TEST_CASE("med_predict stays within [min(A,B,C), max(A,B,C)] on a 17^3 grid") {
  for (int ia = 0; ia <= 16; ++ia)
    for (int ib = 0; ib <= 16; ++ib)
      for (int ic = 0; ic <= 16; ++ic) {
        double a = ia / 16.0, b = ib / 16.0, c = ic / 16.0;
        double mu = med_predict({a, b, c, 0.0});
        CHECK(mu >= std::min({a, b, c}) - 1e-15);
        CHECK(mu <= std::max({a, b, c}) + 1e-15);
      }
}

TEST_CASE("linear_predict projections") {
  PredictorParams p{PredictorKind::kLinear, {1, 0, 0, 0}};
  CHECK(linear_predict(p, {0.73, 0.1, 0.9, 0.2}) == doctest::Approx(0.73));

  PredictorParams avg{PredictorKind::kLinear, {0.5, 0.5, 0, 0}};
  CHECK(linear_predict(avg, {0.2, 0.4, 0.9, 0.9}) == doctest::Approx(0.3));

  // Weights that sum to 1 reproduce a constant context exactly; these are
  // typical photo-corpus coefficients.
  PredictorParams photo{PredictorKind::kLinear, {0.57, 0.48, -0.2, 0.15}};
  CHECK(linear_predict(photo, {0.4, 0.4, 0.4, 0.4}) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("predict_mu avg equals the fixed half-half combination") {
  PredictorParams avg;
  avg.kind = PredictorKind::kAvg;
  Ctx4 c{0.2, 0.4, 0.99, 0.01};
  CHECK(predict_mu(avg, c) == doctest::Approx(0.3));
}

TEST_CASE("fit recovers noiseless linear coefficients") {
  Rng rng(42);
  std::vector<PixelSample> s = linear_samples(rng, 8, {0.5, 0.5, 0, 0});
  PredictorParams p = fit_linear_predictor(s);
  CHECK(p.kind == PredictorKind::kLinear);
  CHECK(std::fabs(p.alpha[0] - 0.5) < 1e-9);
  CHECK(std::fabs(p.alpha[1] - 0.5) < 1e-9);
  CHECK(std::fabs(p.alpha[2]) < 1e-9);
  CHECK(std::fabs(p.alpha[3]) < 1e-9);
}

TEST_CASE("fit matches the independent normal-equation oracle") {
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    int n = 20 + rng.below(100);
    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    std::vector<PixelSample> s;
    for (int i = 0; i < n; ++i) {
      Ctx4 c = testutil::random_ctx(rng);
      double x = rng.uniform();
      s.push_back({c, x});
      rows.push_back({c.a, c.b, c.c, c.d});
      targets.push_back(x);
    }
    PredictorParams p = fit_linear_predictor(s);
    std::vector<double> want = testutil::oracle_normal_solve(rows, targets, 1e-9);
    std::vector<double> got(p.alpha.begin(), p.alpha.end());
    CHECK(testutil::max_abs_diff(got, want) < 1e-8);
  }
}

TEST_CASE("fitted coefficients are a local minimum of the squared error") {
  Rng rng(11);
  std::vector<PixelSample> s;
  for (int i = 0; i < 50; ++i) {
    Ctx4 c = testutil::random_ctx(rng);
    s.push_back({c, rng.uniform()});
  }
  PredictorParams p = fit_linear_predictor(s);
  double base = sse(p, s);
  for (int trial = 0; trial < 1000; ++trial) {
    PredictorParams q = p;
    double norm = 0;
    double delta[4];
    for (double& d : delta) {
      d = rng.uniform(-1, 1);
      norm += d * d;
    }
    norm = std::sqrt(norm);
    double scale = rng.uniform() * 1e-3 / norm;
    for (int i = 0; i < 4; ++i) q.alpha[i] += delta[i] * scale;
    CHECK(sse(q, s) >= base - 1e-15);
  }
}

TEST_CASE("mean_abs_error is zero for a perfect predictor") {
  Rng rng(3);
  std::vector<PixelSample> s = linear_samples(rng, 30, {0.3, 0.3, 0.2, 0.2});
  PredictorParams p = fit_linear_predictor(s);
  CHECK(mean_abs_error(p, s) < 1e-9);
}

TEST_CASE("mean_abs_error of MED on a constant image is zero") {
  // Every branch of MED returns the constant once the context is constant;
  // (0,0) is excluded because its context is the substituted 0.5 border value.
  pcld::Image img = testutil::constant_image(9, 9, 77);
  std::vector<PixelSample> s;
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 9; ++x) {
      if (x == 0 && y == 0) continue;
      s.push_back({context_at(img, x, y), img.at(x, y) / 255.0});
    }
  PredictorParams med;
  med.kind = PredictorKind::kMed;
  CHECK(mean_abs_error(med, s) == doctest::Approx(0.0));
}

TEST_CASE("mean_abs_error matches a direct summation oracle") {
  pcld::Image img = testutil::noise_image(13, 11, 19);
  std::vector<PixelSample> s;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      s.push_back({context_at(img, x, y), img.at(x, y) / 255.0});
  PredictorParams med;
  med.kind = PredictorKind::kMed;
  double got = mean_abs_error(med, s);

  // Independent pass with the MED formula written out.
  double sum = 0;
  for (const PixelSample& it : s) {
    double lo = std::min(it.ctx.a, it.ctx.b), hi = std::max(it.ctx.a, it.ctx.b);
    double mu;
    if (it.ctx.c >= hi)
      mu = lo;
    else if (it.ctx.c <= lo)
      mu = hi;
    else
      mu = it.ctx.a + it.ctx.b - it.ctx.c;
    mu = std::clamp(mu, 0.0, 1.0);
    sum += std::fabs(it.value - mu);
  }
  CHECK(got == doctest::Approx(sum / s.size()).epsilon(1e-12));
}

}  // TEST_SUITE
