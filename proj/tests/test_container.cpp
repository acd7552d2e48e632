#include <doctest.h>

#include <cmath>
#include <vector>

#include "pcld/container.hpp"
#include "pcld/entropy.hpp"
#include "pcld/error.hpp"
#include "pcld/image.hpp"
#include "pcld/predictor.hpp"
#include "pcld/width_model.hpp"
#include "test_util.hpp"

using namespace pcld;
using testutil::Rng;

namespace {

CodecConfig make_config(PredictorKind p, WidthKind w, CoderKind c, ScanMode s, int cycles = 0,
                        double kappa = 1.0, bool adaptive = false) {
  CodecConfig cfg;
  cfg.predictor = p;
  cfg.width = w;
  cfg.coder = c;
  cfg.scan = s;
  cfg.cycles = cycles;
  cfg.kappa = kappa;
  cfg.adaptive = adaptive;
  return cfg;
}

void check_round_trip(const Image& img, const CodecConfig& cfg) {
  std::vector<uint8_t> coded = compress(img, cfg);
  Image back = decompress(coded);
  CHECK(back == img);
}

}  // namespace

TEST_SUITE("container") {

TEST_CASE("constant image with single width and golomb is 64 unary one-bits") {
  // Constant 128: the (0,0) border context (all 0.5) also predicts 128, so
  // every residue is zero and each codeword is the single bit "1".
  Image img = testutil::constant_image(8, 8, 128);
  CodecConfig cfg = make_config(PredictorKind::kMed, WidthKind::kSingle, CoderKind::kGolomb,
                                ScanMode::kRaster);
  std::vector<uint8_t> coded = compress(img, cfg);
  size_t hlen = header_byte_length(coded);
  std::vector<uint8_t> payload(coded.begin() + hlen, coded.end());
  REQUIRE(payload.size() == 8);  // 64 codewords "1", one bit each
  for (uint8_t b : payload) CHECK(b == 0xFF);
}

TEST_CASE("round trip over a quick mode sample") {
  Image noise = testutil::noise_image(19, 13, 70);
  Image smooth = testutil::smooth_image(24, 18, 71);
  for (const Image* img : {&noise, &smooth}) {
    check_round_trip(*img, make_config(PredictorKind::kLinear, WidthKind::kLin4,
                                       CoderKind::kAccurate, ScanMode::kRaster));
    check_round_trip(*img, make_config(PredictorKind::kMed, WidthKind::kCtx365,
                                       CoderKind::kGolomb, ScanMode::kRaster));
    check_round_trip(*img, make_config(PredictorKind::kAvg, WidthKind::kLin11,
                                       CoderKind::kAccurate, ScanMode::kHaar, 2));
    check_round_trip(*img, make_config(PredictorKind::kLinear, WidthKind::kSingle,
                                       CoderKind::kGolomb, ScanMode::kRaster, 0, 1.0, true));
    check_round_trip(*img, make_config(PredictorKind::kLinear, WidthKind::kSingle,
                                       CoderKind::kAccurate, ScanMode::kHaar, 3, 1.0, true));
    check_round_trip(*img, make_config(PredictorKind::kLinear, WidthKind::kLin4,
                                       CoderKind::kAccurate, ScanMode::kRaster, 0, 2.0));
  }
}

TEST_CASE("kappa grid round trips") {
  Image img = testutil::smooth_image(20, 20, 72);
  for (double kappa : {0.5, 1.0, 1.5, 2.0}) {
    check_round_trip(img, make_config(PredictorKind::kLinear, WidthKind::kLin4,
                                      CoderKind::kAccurate, ScanMode::kRaster, 0, kappa));
    check_round_trip(img, make_config(PredictorKind::kLinear, WidthKind::kSingle,
                                      CoderKind::kGolomb, ScanMode::kRaster, 0, kappa, true));
  }
}

TEST_CASE("share_cycles round trips and shrinks the header") {
  Image img = testutil::smooth_image(33, 29, 73);
  CodecConfig shared = make_config(PredictorKind::kLinear, WidthKind::kLin4,
                                   CoderKind::kAccurate, ScanMode::kHaar, 3);
  shared.share_cycles = true;
  CodecConfig separate = shared;
  separate.share_cycles = false;
  check_round_trip(img, shared);
  check_round_trip(img, separate);
  CHECK(header_size_bits(shared) < header_size_bits(separate));
}

TEST_CASE("configuration conflicts error before any output") {
  Image img = testutil::noise_image(8, 8, 74);

  CodecConfig cycles_on_raster = make_config(PredictorKind::kMed, WidthKind::kSingle,
                                             CoderKind::kGolomb, ScanMode::kRaster, 3);
  CHECK_THROWS_WITH_AS(compress(img, cycles_on_raster), doctest::Contains("cycles"), Error);

  CodecConfig adaptive_ctx = make_config(PredictorKind::kMed, WidthKind::kCtx365,
                                         CoderKind::kGolomb, ScanMode::kRaster, 0, 1.0, true);
  CHECK_THROWS_WITH_AS(compress(img, adaptive_ctx), doctest::Contains("adaptive"), Error);

  CodecConfig bad_kappa = make_config(PredictorKind::kMed, WidthKind::kSingle,
                                      CoderKind::kGolomb, ScanMode::kRaster, 0, 0.7);
  CHECK_THROWS_WITH_AS(compress(img, bad_kappa), doctest::Contains("kappa"), Error);

  CodecConfig no_cycles_haar =
      make_config(PredictorKind::kMed, WidthKind::kSingle, CoderKind::kGolomb, ScanMode::kHaar);
  CHECK_THROWS_AS(compress(img, no_cycles_haar), Error);
}

TEST_CASE("decompress rejects malformed streams without crashing") {
  Image img = testutil::noise_image(10, 10, 75);
  std::vector<uint8_t> coded = compress(
      img, make_config(PredictorKind::kLinear, WidthKind::kLin4, CoderKind::kAccurate,
                       ScanMode::kRaster));

  std::vector<uint8_t> bad_magic = coded;
  bad_magic[0] = 'X';
  CHECK_THROWS_WITH_AS(decompress(bad_magic), doctest::Contains("not a PCLD stream"), Error);

  std::vector<uint8_t> bad_version = coded;
  bad_version[4] = 99;
  CHECK_THROWS_WITH_AS(decompress(bad_version), doctest::Contains("version"), Error);

  std::vector<uint8_t> truncated(coded.begin(), coded.begin() + coded.size() / 2);
  CHECK_THROWS_AS(decompress(truncated), Error);

  std::vector<uint8_t> trailing = coded;
  trailing.push_back(0xAB);
  CHECK_THROWS_WITH_AS(decompress(trailing), doctest::Contains("length mismatch"), Error);

  std::vector<uint8_t> empty;
  CHECK_THROWS_AS(decompress(empty), Error);
}

TEST_CASE("header_size_bits equals the measured header length exactly") {
  Image img = testutil::smooth_image(32, 32, 76);
  std::vector<CodecConfig> configs = {
      make_config(PredictorKind::kMed, WidthKind::kSingle, CoderKind::kGolomb, ScanMode::kRaster),
      make_config(PredictorKind::kLinear, WidthKind::kCtx365, CoderKind::kAccurate,
                  ScanMode::kRaster),
      make_config(PredictorKind::kAvg, WidthKind::kLin11, CoderKind::kGolomb, ScanMode::kRaster),
      make_config(PredictorKind::kLinear, WidthKind::kLin4, CoderKind::kAccurate,
                  ScanMode::kHaar, 2),
      make_config(PredictorKind::kLinear, WidthKind::kSingle, CoderKind::kGolomb,
                  ScanMode::kRaster, 0, 1.0, true),
      make_config(PredictorKind::kLinear, WidthKind::kSingle, CoderKind::kAccurate,
                  ScanMode::kHaar, 3, 1.0, true),
  };
  CodecConfig shared = make_config(PredictorKind::kLinear, WidthKind::kLin4,
                                   CoderKind::kGolomb, ScanMode::kHaar, 3);
  shared.share_cycles = true;
  configs.push_back(shared);

  for (const CodecConfig& cfg : configs) {
    std::vector<uint8_t> coded = compress(img, cfg);
    CHECK(header_size_bits(cfg) == 8 * header_byte_length(coded));
  }
}

TEST_CASE("ctx365 header outgrows lin11 by the table size") {
  CodecConfig ctx = make_config(PredictorKind::kLinear, WidthKind::kCtx365, CoderKind::kGolomb,
                                ScanMode::kRaster);
  CodecConfig lin = make_config(PredictorKind::kLinear, WidthKind::kLin11, CoderKind::kGolomb,
                                ScanMode::kRaster);
  CHECK(header_size_bits(ctx) - header_size_bits(lin) == (365 + 24 - 11) * 64);
}

TEST_CASE("encoding is deterministic") {
  Image img = testutil::smooth_image(40, 31, 77);
  for (const CodecConfig& cfg :
       {make_config(PredictorKind::kLinear, WidthKind::kCtx365, CoderKind::kAccurate,
                    ScanMode::kRaster),
        make_config(PredictorKind::kLinear, WidthKind::kLin11, CoderKind::kGolomb,
                    ScanMode::kHaar, 3)}) {
    std::vector<uint8_t> a = compress(img, cfg);
    std::vector<uint8_t> b = compress(img, cfg);
    CHECK(a == b);
  }
}

TEST_CASE("accurate payload sits within 1% of the model cross-entropy plus header") {
  Image img = testutil::smooth_image(128, 128, 78);
  CodecConfig cfg = make_config(PredictorKind::kLinear, WidthKind::kLin4, CoderKind::kAccurate,
                                ScanMode::kRaster);
  std::vector<uint8_t> coded = compress(img, cfg);
  double total_bits = 8.0 * static_cast<double>(coded.size());

  // Ideal accounting from the fitted model, replicated independently.
  std::vector<PixelSample> samples;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      samples.push_back({context_at(img, x, y), img.at(x, y) / 255.0});
  PredictorParams pred = fit_linear_predictor(samples);
  std::vector<WidthSample> ws(samples.size());
  for (size_t i = 0; i < samples.size(); ++i)
    ws[i] = {samples[i].ctx, std::fabs(samples[i].value - predict_mu(pred, samples[i].ctx))};
  WidthModel width = fit_linear_width(WidthKind::kLin4, ws);

  double ideal = static_cast<double>(header_size_bits(cfg));
  size_t i = 0;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x, ++i) {
      double mu = predict_mu(pred, samples[i].ctx);
      int mu_int = std::clamp(static_cast<int>(std::lround(255.0 * mu)), 0, 255);
      double b = predict_b(width, samples[i].ctx);
      ideal -= log2_residue_prob(fold_residue(img.at(x, y), mu_int), 255.0 * b);
    }
  CHECK(total_bits <= ideal * 1.01);
  CHECK(total_bits >= ideal * 0.99);
}

TEST_CASE("1xN and Nx1 images survive every scan/coder pairing") {
  Image row = testutil::noise_image(257, 1, 79);
  Image col = testutil::noise_image(1, 257, 80);
  for (const Image* img : {&row, &col}) {
    for (CoderKind coder : {CoderKind::kGolomb, CoderKind::kAccurate}) {
      check_round_trip(*img, make_config(PredictorKind::kLinear, WidthKind::kLin4, coder,
                                         ScanMode::kRaster));
      // haar clamps to a scan0-only container on 1-pixel-thin images.
      check_round_trip(*img, make_config(PredictorKind::kLinear, WidthKind::kLin4, coder,
                                         ScanMode::kHaar, 3));
    }
  }
}

TEST_CASE("adaptive matrix over fixtures stays lossless") {
  std::vector<Image> fixtures;
  fixtures.push_back(testutil::noise_image(1, 1, 82));
  fixtures.push_back(testutil::noise_image(17, 1, 83));
  fixtures.push_back(testutil::constant_image(12, 9, 128));
  fixtures.push_back(testutil::gradient_image(13, 11));
  fixtures.push_back(testutil::noise_image(16, 16, 84));
  for (PredictorKind pred : {PredictorKind::kMed, PredictorKind::kAvg, PredictorKind::kLinear})
    for (CoderKind coder : {CoderKind::kGolomb, CoderKind::kAccurate})
      for (ScanMode scan : {ScanMode::kRaster, ScanMode::kHaar})
        for (const Image& img : fixtures) {
          CodecConfig cfg = make_config(pred, WidthKind::kSingle, coder, scan,
                                        scan == ScanMode::kHaar ? 3 : 0, 1.0, true);
          check_round_trip(img, cfg);
        }
}

TEST_CASE("adaptive mode stores no width parameters") {
  Image img = testutil::smooth_image(24, 24, 81);
  CodecConfig adaptive = make_config(PredictorKind::kLinear, WidthKind::kSingle,
                                     CoderKind::kGolomb, ScanMode::kRaster, 0, 1.0, true);
  CodecConfig fitted = make_config(PredictorKind::kLinear, WidthKind::kSingle,
                                   CoderKind::kGolomb, ScanMode::kRaster);
  CHECK(header_size_bits(adaptive) == header_size_bits(fitted));  // same SINGLE layout
  check_round_trip(img, adaptive);
}

}  // TEST_SUITE
