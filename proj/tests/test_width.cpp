#include <doctest.h>

#include <cmath>
#include <cstring>
#include <set>
#include <vector>

#include "pcld/error.hpp"
#include "pcld/width_model.hpp"
#include "test_util.hpp"

using namespace pcld;
using testutil::ctx_from_diffs;
using testutil::Rng;

namespace {

// Thresholds with per-channel positive levels at 0.02/0.06/0.10/0.14; the
// diff magnitudes 0, .045, .09, .13, .18 land in levels 0..4.
Thresholds small_thresholds() {
  Thresholds th;
  for (int ch = 0; ch < 3; ++ch) th.t[ch] = {-0.14, -0.10, -0.06, -0.02, 0.02, 0.06, 0.10, 0.14};
  return th;
}

double level_diff(int level) {
  static const double mag[5] = {0.0, 0.045, 0.09, 0.13, 0.18};
  double m = mag[std::abs(level)];
  return level < 0 ? -m : m;
}

std::vector<WidthSample> synth_width_samples(Rng& rng, int n, WidthKind basis,
                                             const std::vector<double>& beta, double kappa) {
  std::vector<WidthSample> s;
  for (int i = 0; i < n; ++i) {
    Ctx4 c = testutil::random_ctx(rng);
    double theta = 0;
    if (basis == WidthKind::kLin4) {
      auto g = basis_b4(c);
      for (int j = 0; j < 4; ++j) theta += beta[j] * g[j];
    } else {
      auto g = basis_b11(c);
      for (int j = 0; j < 11; ++j) theta += beta[j] * g[j];
    }
    s.push_back({c, std::pow(theta, 1.0 / kappa)});
  }
  return s;
}

}  // namespace

TEST_SUITE("width") {

TEST_CASE("basis_b4 on flat and unit-difference contexts") {
  auto flat = basis_b4({0.4, 0.4, 0.4, 0.4});
  CHECK(flat[0] == 1.0);
  CHECK(flat[1] == 0.0);
  CHECK(flat[2] == 0.0);
  CHECK(flat[3] == 0.0);

  // |C-A| = 1, other differences zero.
  auto unit = basis_b4({0.0, 1.0, 1.0, 1.0});
  CHECK(unit[1] == doctest::Approx(1.0));
  CHECK(unit[2] == 0.0);
  CHECK(unit[3] == 0.0);
}

TEST_CASE("basis_b4 half-difference evaluates 0.5^0.8") {
  auto g = basis_b4({0.0, 0.5, 0.5, 0.5});
  CHECK(g[1] == doctest::Approx(0.5743491774985174).epsilon(1e-12));
  CHECK(g[2] == 0.0);
  CHECK(g[3] == 0.0);
}

TEST_CASE("basis_b11 vanishes at the cube center") {
  auto g = basis_b11({0.5, 0.5, 0.5, 0.5});
  CHECK(g[0] == 1.0);
  for (int i = 1; i < 11; ++i) CHECK(g[i] == 0.0);
}

TEST_CASE("basis_b11 intensity terms are exact quartics") {
  auto g = basis_b11({0.0, 0.5, 0.5, 0.5});
  CHECK(g[4] == doctest::Approx(0.0625).epsilon(1e-15));  // (0-1/2)^4
}

TEST_CASE("basis_b11 second-derivative term evaluates 0.2^0.1") {
  // |C - 2B + D| = |0.1 - 0.8 + 0.5| = 0.2.
  auto g = basis_b11({0.3, 0.4, 0.1, 0.5});
  CHECK(g[8] == doctest::Approx(0.8513399225207846).epsilon(1e-12));
}

TEST_CASE("predict_b for the three model families") {
  Rng rng(1);
  WidthModel single;
  single.kind = WidthKind::kSingle;
  single.single_b = 0.05;
  CHECK(predict_b(single, testutil::random_ctx(rng)) == doctest::Approx(0.05));

  WidthModel lin;
  lin.kind = WidthKind::kLin4;
  lin.beta = {0.01, 0.02, 0, 0};
  CHECK(predict_b(lin, {0.0, 0.5, 0.5, 0.5}) ==
        doctest::Approx(0.021486983549970348).epsilon(1e-12));

  WidthModel neg;
  neg.kind = WidthKind::kLin4;
  neg.beta = {-1.0, 0, 0, 0};
  CHECK(predict_b(neg, {0.5, 0.5, 0.5, 0.5}) == 0.001);  // clamp
}

TEST_CASE("quantize_ctx maps the zero triple to a stable class with sign +1") {
  Thresholds th = small_thresholds();
  QuantizedCtx q1 = quantize_ctx(th, {0.3, 0.3, 0.3, 0.3});
  QuantizedCtx q2 = quantize_ctx(th, {0.8, 0.8, 0.8, 0.8});
  CHECK(q1.sign == 1);
  CHECK(q1.index == q2.index);
  CHECK(q1.index == 0);
}

TEST_CASE("quantize_ctx merges mirrored triples with opposite signs") {
  Thresholds th = small_thresholds();
  // Levels (-2, 1, 0) and (2, -1, 0).
  QuantizedCtx qa = quantize_ctx(th, ctx_from_diffs(level_diff(-2), level_diff(1), 0.0));
  QuantizedCtx qb = quantize_ctx(th, ctx_from_diffs(level_diff(2), level_diff(-1), 0.0));
  CHECK(qa.index == qb.index);
  CHECK(qa.sign == -1);
  CHECK(qb.sign == 1);
}

TEST_CASE("quantize_ctx produces exactly 365 classes over all level triples") {
  Thresholds th = small_thresholds();
  std::set<int> classes;
  for (int l1 = -4; l1 <= 4; ++l1)
    for (int l2 = -4; l2 <= 4; ++l2)
      for (int l3 = -4; l3 <= 4; ++l3) {
        Ctx4 c = ctx_from_diffs(level_diff(l1), level_diff(l2), level_diff(l3));
        QuantizedCtx q = quantize_ctx(th, c);
        CHECK(q.index >= 0);
        CHECK(q.index < kCtxClasses);
        classes.insert(q.index);

        // Sign equivariance against the mirrored triple.
        Ctx4 m = ctx_from_diffs(level_diff(-l1), level_diff(-l2), level_diff(-l3));
        QuantizedCtx qm = quantize_ctx(th, m);
        CHECK(qm.index == q.index);
        if (l1 != 0 || l2 != 0 || l3 != 0) CHECK(qm.sign == -q.sign);
      }
  CHECK(classes.size() == kCtxClasses);
}

TEST_CASE("fit_thresholds recovers uniform quantiles") {
  Rng rng(77);
  std::vector<Ctx4> ctxs;
  for (int i = 0; i < 9000; ++i)
    ctxs.push_back(ctx_from_diffs(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3),
                                  rng.uniform(-0.3, 0.3)));
  Thresholds th = fit_thresholds(ctxs);
  // Uniform(-0.3, 0.3): quantile k/9 sits at -0.3 + 0.6k/9; symmetrized
  // magnitudes are 0.3*(1 - 2k/9) for k=1..4.
  for (int ch = 0; ch < 3; ++ch) {
    CHECK(th.t[ch][7] == doctest::Approx(0.3 * 7.0 / 9.0).epsilon(0.1));
    CHECK(th.t[ch][4] == doctest::Approx(0.3 * 1.0 / 9.0).epsilon(0.4));
    for (int i = 0; i < 4; ++i)
      CHECK(th.t[ch][i] == doctest::Approx(-th.t[ch][7 - i]).epsilon(1e-12));
    for (int i = 1; i < 8; ++i) CHECK(th.t[ch][i] >= th.t[ch][i - 1]);
  }
}

TEST_CASE("fit_thresholds degenerates to zeros on constant contexts") {
  std::vector<Ctx4> ctxs(20, Ctx4{0.4, 0.4, 0.4, 0.4});
  Thresholds th = fit_thresholds(ctxs);
  for (int ch = 0; ch < 3; ++ch)
    for (double t : th.t[ch]) CHECK(t == 0.0);
}

TEST_CASE("fit_thresholds yields near-equal level populations") {
  Rng rng(78);
  std::vector<Ctx4> ctxs;
  const int n = 9000;
  for (int i = 0; i < n; ++i)
    ctxs.push_back(ctx_from_diffs(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3),
                                  rng.uniform(-0.3, 0.3)));
  Thresholds th = fit_thresholds(ctxs);
  int counts[9] = {0};
  for (const Ctx4& c : ctxs) {
    double d = c.c - c.a;  // channel 0
    double ad = std::fabs(d);
    int lvl = 0;
    for (int j = 4; j < 8; ++j)
      if (ad > th.t[0][j]) ++lvl;
    counts[(d < 0 ? -lvl : lvl) + 4]++;
  }
  for (int k = 0; k < 9; ++k) {
    CHECK(counts[k] > n / 9 * 0.8);
    CHECK(counts[k] < n / 9 * 1.2);
  }
}

TEST_CASE("fit_ctx365 shrinkage behavior") {
  Thresholds th = small_thresholds();

  // Single context, constant residues: shrinkage toward the (equal) global
  // mean is a no-op.
  std::vector<WidthSample> flat(100, WidthSample{{0.5, 0.5, 0.5, 0.5}, 0.02});
  WidthModel m = fit_ctx365(th, flat);
  int idx0 = quantize_ctx(th, {0.5, 0.5, 0.5, 0.5}).index;
  CHECK(m.table[idx0] == doctest::Approx(0.02).epsilon(1e-12));

  // Empty contexts fall back to the global mean.
  int other = (idx0 + 7) % kCtxClasses;
  CHECK(m.table[other] == doctest::Approx(0.02).epsilon(1e-12));
}

TEST_CASE("fit_ctx365 separates two populations") {
  Thresholds th = small_thresholds();
  Ctx4 quiet = ctx_from_diffs(0, 0, 0);
  Ctx4 busy = ctx_from_diffs(level_diff(4), level_diff(4), level_diff(4));
  std::vector<WidthSample> s;
  for (int i = 0; i < 2000; ++i) s.push_back({quiet, 0.01});
  for (int i = 0; i < 2000; ++i) s.push_back({busy, 0.04});
  WidthModel m = fit_ctx365(th, s);
  CHECK(m.table[quantize_ctx(th, quiet).index] == doctest::Approx(0.01).epsilon(0.05));
  CHECK(m.table[quantize_ctx(th, busy).index] == doctest::Approx(0.04).epsilon(0.05));
}

TEST_CASE("fit_linear_width recovers noiseless coefficients") {
  Rng rng(5);
  std::vector<WidthSample> s = synth_width_samples(rng, 200, WidthKind::kLin4,
                                                   {0.01, 0.03, 0, 0}, 1.0);
  WidthModel m = fit_linear_width(WidthKind::kLin4, s);
  CHECK(std::fabs(m.beta[0] - 0.01) < 1e-9);
  CHECK(std::fabs(m.beta[1] - 0.03) < 1e-9);
  CHECK(std::fabs(m.beta[2]) < 1e-9);
  CHECK(std::fabs(m.beta[3]) < 1e-9);
}

TEST_CASE("fit_linear_width matches the oracle on random data") {
  Rng rng(6);
  for (WidthKind kind : {WidthKind::kLin4, WidthKind::kLin11}) {
    int d = width_basis_dim(kind);
    std::vector<WidthSample> s;
    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    for (int i = 0; i < 300; ++i) {
      Ctx4 c = testutil::random_ctx(rng);
      double r = rng.uniform() * 0.1;
      s.push_back({c, r});
      std::vector<double> row(d);
      if (kind == WidthKind::kLin4) {
        auto g = basis_b4(c);
        row.assign(g.begin(), g.end());
      } else {
        auto g = basis_b11(c);
        row.assign(g.begin(), g.end());
      }
      rows.push_back(row);
      targets.push_back(r);
    }
    WidthModel m = fit_linear_width(kind, s);
    std::vector<double> want = testutil::oracle_normal_solve(rows, targets, 1e-9);
    CHECK(testutil::max_abs_diff(m.beta, want) < 1e-8);
  }
}

TEST_CASE("b4 width fit on smooth image data keeps positive coefficients") {
  // Reported observation, not a hard contract.
  pcld::Image img = testutil::smooth_image(96, 96, 3);
  std::vector<WidthSample> s;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      Ctx4 c = context_at(img, x, y);
      double mu = 0.5 * c.a + 0.5 * c.b;
      s.push_back({c, std::fabs(img.at(x, y) / 255.0 - mu)});
    }
  WidthModel m = fit_linear_width(WidthKind::kLin4, s);
  for (double b : m.beta) {
    WARN_MESSAGE(b >= 0.0, "b4 coefficient came out negative: " << b);
  }
}

TEST_CASE("fit_linear_width objective is a local minimum") {
  Rng rng(15);
  std::vector<WidthSample> s;
  for (int i = 0; i < 120; ++i) s.push_back({testutil::random_ctx(rng), rng.uniform() * 0.1});
  WidthModel m = fit_linear_width(WidthKind::kLin4, s);

  auto objective = [&](const std::vector<double>& beta) {
    double sum = 0;
    for (const WidthSample& it : s) {
      auto g = basis_b4(it.ctx);
      double pred = 0;
      for (int j = 0; j < 4; ++j) pred += beta[j] * g[j];
      double e = it.abs_residue - pred;
      sum += e * e;
    }
    return sum;
  };
  double base = objective(m.beta);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> perturbed = m.beta;
    double norm = 0;
    double delta[4];
    for (double& d : delta) {
      d = rng.uniform(-1, 1);
      norm += d * d;
    }
    double scale = rng.uniform() * 1e-3 / std::sqrt(norm);
    for (int j = 0; j < 4; ++j) perturbed[j] += delta[j] * scale;
    CHECK(objective(perturbed) >= base - 1e-15);
  }
}

TEST_CASE("epd_fit with kappa=1 is bit-identical to fit_linear_width") {
  Rng rng(9);
  std::vector<WidthSample> s;
  for (int i = 0; i < 120; ++i) s.push_back({testutil::random_ctx(rng), rng.uniform() * 0.2});
  WidthModel a = fit_linear_width(WidthKind::kLin11, s);
  WidthModel b = epd_fit(WidthKind::kLin11, s, 1.0);
  REQUIRE(a.beta.size() == b.beta.size());
  CHECK(std::memcmp(a.beta.data(), b.beta.data(), a.beta.size() * sizeof(double)) == 0);
}

TEST_CASE("epd_fit kappa=2 with flat contexts is the Gaussian variance MLE") {
  Rng rng(10);
  Ctx4 flat{0.5, 0.5, 0.5, 0.5};  // basis (1,0,0,0): intercept only
  std::vector<WidthSample> s;
  double sum_sq = 0;
  for (int i = 0; i < 5000; ++i) {
    double r = std::fabs(0.1 * rng.normal());
    s.push_back({flat, r});
    sum_sq += r * r;
  }
  WidthModel m = epd_fit(WidthKind::kLin4, s, 2.0);
  double b = predict_b(m, flat);
  CHECK(b * b == doctest::Approx(sum_sq / 5000.0).epsilon(1e-6));
}

TEST_CASE("epd_fit kappa=1.5 recovers generating coefficients") {
  Rng rng(12);
  std::vector<WidthSample> s =
      synth_width_samples(rng, 400, WidthKind::kLin4, {0.02, 0.05, 0.01, 0.0}, 1.5);
  WidthModel m = epd_fit(WidthKind::kLin4, s, 1.5);
  CHECK(std::fabs(m.beta[0] - 0.02) < 1e-8);
  CHECK(std::fabs(m.beta[1] - 0.05) < 1e-8);
  CHECK(std::fabs(m.beta[2] - 0.01) < 1e-8);
  CHECK(std::fabs(m.beta[3]) < 1e-8);
}

TEST_CASE("laplace_mle basics") {
  std::vector<double> v{1, 2, 3};
  auto [mu, b] = laplace_mle(v);
  CHECK(mu == 2.0);
  CHECK(b == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  std::vector<double> even{4, 1, 2, 3};
  CHECK(laplace_mle(even).first == 2.0);  // lower median

  std::vector<double> flat(9, 0.7);
  CHECK(laplace_mle(flat).second == 0.0);
}

TEST_CASE("laplace_mle concentrates on sampled data") {
  Rng rng(123);
  std::vector<double> v(10000);
  for (double& x : v) x = rng.laplace(0.1);
  auto [mu, b] = laplace_mle(v);
  CHECK(b > 0.095);
  CHECK(b < 0.105);
  CHECK(std::fabs(mu) < 0.01);
}

TEST_CASE("predict_b is always positive") {
  Rng rng(14);
  std::vector<WidthSample> s;
  for (int i = 0; i < 50; ++i) s.push_back({testutil::random_ctx(rng), rng.uniform() * 0.01});
  for (WidthKind kind : {WidthKind::kLin4, WidthKind::kLin11}) {
    WidthModel m = fit_linear_width(kind, s);
    m.beta[0] -= 1.0;  // force negative predictions
    for (int i = 0; i < 100; ++i) CHECK(predict_b(m, testutil::random_ctx(rng)) > 0.0);
  }
  WidthModel single;
  single.kind = WidthKind::kSingle;
  single.single_b = 0.0;
  CHECK(predict_b(single, testutil::random_ctx(rng)) > 0.0);
}

}  // TEST_SUITE
