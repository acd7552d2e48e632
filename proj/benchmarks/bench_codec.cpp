#include <benchmark/benchmark.h>

#include <vector>

#include "pcld/container.hpp"
#include "pcld/entropy.hpp"
#include "pcld/multiscale.hpp"
#include "pcld/predictor.hpp"
#include "pcld/range_coder.hpp"
#include "pcld/width_model.hpp"
#include "test_util.hpp"

namespace {

using namespace pcld;

const Image& bench_image() {
  static const Image img = testutil::smooth_image(512, 512, 424242);
  return img;
}

CodecConfig config_for(int width_sel, int coder_sel, int scan_sel) {
  CodecConfig cfg;
  cfg.predictor = PredictorKind::kLinear;
  cfg.width = static_cast<WidthKind>(width_sel);
  cfg.coder = static_cast<CoderKind>(coder_sel);
  cfg.scan = static_cast<ScanMode>(scan_sel);
  cfg.cycles = scan_sel == 1 ? 3 : 0;
  return cfg;
}

void BM_Compress(benchmark::State& state) {
  const Image& img = bench_image();
  CodecConfig cfg = config_for(static_cast<int>(state.range(0)),
                               static_cast<int>(state.range(1)),
                               static_cast<int>(state.range(2)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(compress(img, cfg));
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) * img.size());
}

void BM_Decompress(benchmark::State& state) {
  const Image& img = bench_image();
  CodecConfig cfg = config_for(static_cast<int>(state.range(0)),
                               static_cast<int>(state.range(1)),
                               static_cast<int>(state.range(2)));
  std::vector<uint8_t> coded = compress(img, cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(decompress(coded));
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) * img.size());
}

// Args: {width model, coder, scan}.
BENCHMARK(BM_Compress)
    ->Args({2, 0, 0})   // lin4 golomb raster
    ->Args({2, 1, 0})   // lin4 accurate raster
    ->Args({1, 1, 0})   // ctx365 accurate raster
    ->Args({3, 1, 1});  // lin11 accurate haar
BENCHMARK(BM_Decompress)
    ->Args({2, 0, 0})
    ->Args({2, 1, 0})
    ->Args({1, 1, 0})
    ->Args({3, 1, 1});

void BM_FitLinearPredictor(benchmark::State& state) {
  const Image& img = bench_image();
  std::vector<PixelSample> samples;
  samples.reserve(img.size());
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      samples.push_back({context_at(img, x, y), img.at(x, y) / 255.0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_linear_predictor(samples));
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * samples.size());
}
BENCHMARK(BM_FitLinearPredictor);

void BM_FitWidthLin11(benchmark::State& state) {
  const Image& img = bench_image();
  std::vector<PixelSample> samples;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      samples.push_back({context_at(img, x, y), img.at(x, y) / 255.0});
  PredictorParams pred = fit_linear_predictor(samples);
  std::vector<WidthSample> ws(samples.size());
  for (size_t i = 0; i < samples.size(); ++i)
    ws[i] = {samples[i].ctx, std::fabs(samples[i].value - predict_mu(pred, samples[i].ctx))};
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_linear_width(WidthKind::kLin11, ws));
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * ws.size());
}
BENCHMARK(BM_FitWidthLin11);

void BM_BuildPyramid(benchmark::State& state) {
  const Image& img = bench_image();
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_pyramid(img, 3));
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) * img.size());
}
BENCHMARK(BM_BuildPyramid);

void BM_RangeCoderRoundTrip(benchmark::State& state) {
  testutil::Rng rng(5);
  const BGrid& grid = BGrid::raster();
  int level = grid.level_for(8.0);
  const int n = 1 << 16;
  std::vector<int> symbols(n), levels(n, level);
  for (int& s : symbols)
    s = symbol_from_cum(grid.cum(level), rng.u32() & 0xFFFFu);
  for (auto _ : state) {
    std::vector<uint8_t> payload = accurate_encode(symbols, levels, grid);
    benchmark::DoNotOptimize(accurate_decode(payload, n, levels, grid));
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * n);
}
BENCHMARK(BM_RangeCoderRoundTrip);

}  // namespace

BENCHMARK_MAIN();
