#include "pcld/container.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>

#include "pcld/adaptive.hpp"
#include "pcld/bitio.hpp"
#include "pcld/entropy.hpp"
#include "pcld/error.hpp"
#include "pcld/linalg.hpp"
#include "pcld/multiscale.hpp"
#include "pcld/range_coder.hpp"

namespace pcld {

namespace {

constexpr uint8_t kMagic[4] = {'P', 'C', 'L', 'D'};
constexpr uint8_t kVersion = 1;
constexpr uint8_t kSharedBlock = 0xFF;
constexpr double kMinB = 0.001;

// ---- byte-level serialization -------------------------------------------

struct ByteWriter {
  std::vector<uint8_t> bytes;

  void u8(uint8_t v) { bytes.push_back(v); }
  void u16be(uint16_t v) {
    bytes.push_back(static_cast<uint8_t>(v >> 8));
    bytes.push_back(static_cast<uint8_t>(v));
  }
  void u32be(uint32_t v) {
    for (int i = 3; i >= 0; --i) bytes.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void f64be(double v) {
    uint64_t u = std::bit_cast<uint64_t>(v);
    for (int i = 7; i >= 0; --i) bytes.push_back(static_cast<uint8_t>(u >> (8 * i)));
  }
};

struct ByteReader {
  std::span<const uint8_t> bytes;
  size_t pos = 0;

  uint8_t u8() {
    if (pos >= bytes.size()) fail("container: truncated header");
    return bytes[pos++];
  }
  uint16_t u16be() {
    uint16_t v = u8();
    return static_cast<uint16_t>((v << 8) | u8());
  }
  uint32_t u32be() {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | u8();
    return v;
  }
  double f64be() {
    uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u = (u << 8) | u8();
    return std::bit_cast<double>(u);
  }
  std::span<const uint8_t> rest() const { return bytes.subspan(pos); }
};

// ---- shared model state --------------------------------------------------

inline int clamp_round_255(double mu) {
  return std::clamp(static_cast<int>(std::lround(255.0 * mu)), 0, 255);
}

inline double adaptive_b(const EmaState& s) {
  double b = (s.kappa == 1.0) ? s.theta : std::pow(s.theta, 1.0 / s.kappa);
  return std::max(b, kMinB);
}

inline EmaState adaptive_seed(double b0, double kappa) {
  EmaState s;
  s.mu = 0.0;
  s.theta = (kappa == 1.0) ? b0 : std::pow(b0, kappa);
  s.nu = 1.0;  // mu is pinned; the stream feeds centered residuals
  s.eta = kAdaptiveWidthEta;
  s.kappa = kappa;
  return s;
}

// Per-pixel raster model evaluation, identical on both codec sides.
struct RasterCoder {
  PredictorParams pred;
  WidthModel width;
  double kappa = 1.0;
  bool adaptive = false;
  EmaState theta;

  void reset_adaptive(double b0) {
    if (adaptive) theta = adaptive_seed(b0, kappa);
  }

  struct PixelModel {
    int mu_int;
    int level;
    int sign;
  };

  PixelModel eval(const Image& decoded, int x, int y) const {
    Ctx4 c = context_at(decoded, x, y);
    double mu = predict_mu(pred, c);
    PixelModel pm;
    pm.mu_int = clamp_round_255(mu);
    pm.sign = 1;
    double b;
    if (adaptive) {
      b = adaptive_b(theta);
    } else if (width.kind == WidthKind::kCtx365) {
      QuantizedCtx q = quantize_ctx(width.thresholds, c);
      pm.sign = q.sign;
      b = std::max(width.table[q.index], kMinB);
    } else {
      b = predict_b(width, c);
    }
    pm.level = BGrid::raster().level_for(255.0 * b);
    return pm;
  }

  void advance(int x_int, int mu_int) {
    if (adaptive) theta = ema_update(theta, (x_int - mu_int) / 255.0);
  }
};

// One haar scan stream (scan0 or a detail grid).
struct StreamCoder {
  ScanType type = ScanType::kScan0;
  std::span<const double> alpha;
  std::span<const double> beta;
  double kappa = 1.0;
  bool adaptive = false;
  EmaState theta;

  int alphabet() const { return type == ScanType::kScan0 ? kRasterAlphabet : kDetailAlphabet; }
  const BGrid& grid() const {
    return type == ScanType::kScan0 ? BGrid::raster() : BGrid::detail();
  }

  void begin(double b0) {
    if (adaptive) theta = adaptive_seed(b0, kappa);
  }

  struct CellModel {
    int mu_int;
    int level;
  };

  CellModel eval(std::span<const double> ctx) const {
    double mu = predict_scan_mu(alpha, ctx);
    CellModel cm;
    int lo = (type == ScanType::kScan0) ? 0 : -255;  // averages 0..255, details -255..255
    cm.mu_int = std::clamp(static_cast<int>(std::lround(255.0 * mu)), lo, 255);
    double b = adaptive ? adaptive_b(theta) : predict_scan_b(beta, type, ctx, kappa);
    cm.level = grid().level_for(255.0 * b);
    return cm;
  }

  void advance(int value, int mu_int) {
    if (adaptive) theta = ema_update(theta, (value - mu_int) / 255.0);
  }
};

// Unified symbol sink/source so golomb and the range coder share the codec
// loops.
struct SymbolWriter {
  CoderKind coder;
  BitWriter bits;
  RangeEncoder range;

  void put(unsigned u, int level, const BGrid& grid) {
    if (coder == CoderKind::kGolomb) {
      golomb_encode(bits, u, grid.golomb_m(level));
    } else {
      std::span<const uint32_t> cum = grid.cum(level);
      range.encode(cum[u], cum[u + 1] - cum[u]);
    }
  }

  std::vector<uint8_t> finish() {
    return coder == CoderKind::kGolomb ? bits.finish() : range.finish();
  }
};

struct SymbolReader {
  CoderKind coder;
  std::optional<BitReader> bits;
  std::optional<RangeDecoder> range;
  std::span<const uint8_t> payload;

  explicit SymbolReader(CoderKind kind, std::span<const uint8_t> bytes)
      : coder(kind), payload(bytes) {
    if (coder == CoderKind::kGolomb) {
      bits.emplace(bytes);
    } else {
      range.emplace(bytes);
    }
  }

  unsigned get(int level, const BGrid& grid) {
    if (coder == CoderKind::kGolomb) return golomb_decode(*bits, grid.golomb_m(level));
    std::span<const uint32_t> cum = grid.cum(level);
    uint32_t v = range->decode_value();
    int s = symbol_from_cum(cum, v);
    range->consume(cum[s], cum[s + 1] - cum[s]);
    return static_cast<unsigned>(s);
  }

  // Declared sizes must match the payload exactly.
  void check_fully_consumed() const {
    if (coder == CoderKind::kGolomb) {
      size_t used_bytes = (bits->bit_pos() + 7) / 8;
      if (used_bytes != payload.size()) fail("container: payload length mismatch");
    } else {
      if (range->bytes_read() != payload.size()) fail("container: payload length mismatch");
    }
  }
};

// ---- header --------------------------------------------------------------

struct HaarModelSet {
  bool share = false;
  ScanModel scan0;
  std::vector<ScanModel> details;

  const ScanModel& find(ScanType type, int det_index) const {
    for (const ScanModel& m : details) {
      if (m.type != type) continue;
      if (share || m.det_index == det_index) return m;
    }
    fail("container: missing scan model block");
  }
};

struct Header {
  int width = 0;
  int height = 0;
  ScanMode scan = ScanMode::kRaster;
  int cycles = 0;
  PredictorParams pred;
  WidthModel width_model;
  double kappa = 1.0;
  CoderKind coder = CoderKind::kGolomb;
  bool adaptive = false;
  uint32_t symbol_count = 0;
  HaarModelSet haar;
};

void write_thresholds(ByteWriter& w, const Thresholds& th) {
  for (int ch = 0; ch < 3; ++ch)
    for (int i = 0; i < 8; ++i) w.f64be(th.t[ch][i]);
}

Thresholds read_thresholds(ByteReader& r) {
  Thresholds th;
  for (int ch = 0; ch < 3; ++ch)
    for (int i = 0; i < 8; ++i) th.t[ch][i] = r.f64be();
  return th;
}

std::vector<uint8_t> serialize_header(const Header& h) {
  ByteWriter w;
  for (uint8_t c : kMagic) w.u8(c);
  w.u8(kVersion);
  w.u16be(static_cast<uint16_t>(h.width));
  w.u16be(static_cast<uint16_t>(h.height));
  w.u8(static_cast<uint8_t>(h.scan));
  if (h.scan == ScanMode::kHaar) w.u8(static_cast<uint8_t>(h.cycles));

  w.u8(static_cast<uint8_t>(h.pred.kind));
  if (h.pred.kind == PredictorKind::kLinear)
    for (double a : h.pred.alpha) w.f64be(a);

  w.u8(static_cast<uint8_t>(h.width_model.kind));
  switch (h.width_model.kind) {
    case WidthKind::kSingle:
      w.f64be(h.width_model.single_b);
      break;
    case WidthKind::kCtx365:
      write_thresholds(w, h.width_model.thresholds);
      for (double b : h.width_model.table) w.f64be(b);
      break;
    case WidthKind::kLin4:
    case WidthKind::kLin11:
      for (double b : h.width_model.beta) w.f64be(b);
      break;
  }

  w.f64be(h.kappa);
  w.u8(static_cast<uint8_t>(h.coder));
  w.u8(h.adaptive ? 1 : 0);
  w.u32be(h.symbol_count);

  if (h.scan == ScanMode::kHaar) {
    w.u8(h.haar.share ? 1 : 0);
    w.u8(static_cast<uint8_t>(h.haar.details.size()));
    for (const ScanModel& m : h.haar.details) {
      w.u8(static_cast<uint8_t>(m.type));
      w.u8(m.det_index < 0 ? kSharedBlock : static_cast<uint8_t>(m.det_index));
      w.u8(static_cast<uint8_t>(m.alpha.size()));
      w.u8(static_cast<uint8_t>(m.beta.size()));
      for (double a : m.alpha) w.f64be(a);
      for (double b : m.beta) w.f64be(b);
    }
  }
  return w.bytes;
}

Header parse_header(ByteReader& r) {
  for (uint8_t c : kMagic)
    if (r.u8() != c) fail("container: not a PCLD stream");
  uint8_t version = r.u8();
  if (version != kVersion)
    fail("container: unsupported version " + std::to_string(version));

  Header h;
  h.width = r.u16be();
  h.height = r.u16be();
  if (h.width == 0 || h.height == 0) fail("container: zero image dimension");

  uint8_t scan = r.u8();
  if (scan > 1) fail("container: unknown scan mode");
  h.scan = static_cast<ScanMode>(scan);
  if (h.scan == ScanMode::kHaar) {
    h.cycles = r.u8();
    if (h.cycles > 16) fail("container: implausible cycle count");
  }

  uint8_t pk = r.u8();
  if (pk > 2) fail("container: unknown predictor kind");
  h.pred.kind = static_cast<PredictorKind>(pk);
  if (h.pred.kind == PredictorKind::kLinear)
    for (double& a : h.pred.alpha) a = r.f64be();

  uint8_t wk = r.u8();
  if (wk > 3) fail("container: unknown width model");
  h.width_model.kind = static_cast<WidthKind>(wk);
  switch (h.width_model.kind) {
    case WidthKind::kSingle:
      h.width_model.single_b = r.f64be();
      break;
    case WidthKind::kCtx365:
      h.width_model.thresholds = read_thresholds(r);
      h.width_model.table.resize(kCtxClasses);
      for (double& b : h.width_model.table) b = r.f64be();
      break;
    case WidthKind::kLin4:
    case WidthKind::kLin11:
      h.width_model.beta.resize(width_basis_dim(h.width_model.kind));
      for (double& b : h.width_model.beta) b = r.f64be();
      break;
  }

  h.kappa = r.f64be();
  if (!(h.kappa > 0.0) || !std::isfinite(h.kappa)) fail("container: bad kappa");
  h.width_model.kappa = h.kappa;

  uint8_t ck = r.u8();
  if (ck > 1) fail("container: unknown coder");
  h.coder = static_cast<CoderKind>(ck);
  h.adaptive = r.u8() != 0;
  h.symbol_count = r.u32be();

  if (h.scan == ScanMode::kHaar) {
    h.haar.share = r.u8() != 0;
    int nblocks = r.u8();
    for (int i = 0; i < nblocks; ++i) {
      ScanModel m;
      uint8_t type = r.u8();
      if (type < 1 || type > 3) fail("container: bad scan model type");
      m.type = static_cast<ScanType>(type);
      uint8_t det = r.u8();
      m.det_index = (det == kSharedBlock) ? -1 : det;
      int da = r.u8();
      int db = r.u8();
      if (da != scan_context_dim(m.type)) fail("container: scan model arity mismatch");
      if (db != 0 && db != scan_width_basis_dim(m.type))
        fail("container: scan width arity mismatch");
      m.alpha.resize(da);
      for (double& a : m.alpha) a = r.f64be();
      m.beta.resize(db);
      for (double& b : m.beta) b = r.f64be();
      h.haar.details.push_back(std::move(m));
    }
    // The global fields carry scan0's model.
    if (h.pred.kind != PredictorKind::kLinear)
      fail("container: haar header requires a linear scan0 predictor");
    h.haar.scan0.type = ScanType::kScan0;
    h.haar.scan0.det_index = -1;
    h.haar.scan0.alpha.assign(h.pred.alpha.begin(), h.pred.alpha.end());
    if (!h.adaptive) {
      if (h.width_model.kind != WidthKind::kLin4)
        fail("container: haar header requires a LIN4-shaped scan0 width");
      h.haar.scan0.beta = h.width_model.beta;
    }
    int expected = h.haar.share ? (h.cycles > 0 ? 3 : 0) : 3 * h.cycles;
    if (static_cast<int>(h.haar.details.size()) != expected)
      fail("container: scan model block count mismatch");
  }
  return h;
}

// ---- config validation -----------------------------------------------------

void validate_config(const Image& img, const CodecConfig& cfg) {
  require(img.width > 0 && img.height > 0, "compress: empty image");
  require(img.pixels.size() == static_cast<size_t>(img.width) * img.height,
          "compress: pixel buffer does not match dimensions");
  require(img.width <= 0xFFFF && img.height <= 0xFFFF,
          "compress: dimensions exceed the u16 header fields");
  if (cfg.scan == ScanMode::kRaster) {
    require(cfg.cycles == 0, "compress: cycles only valid with the haar scan");
    require(!cfg.share_cycles, "compress: share-cycles only valid with the haar scan");
  } else {
    require(cfg.cycles >= 1 && cfg.cycles <= 8, "compress: haar cycles must be in [1,8]");
  }
  bool kappa_ok = cfg.kappa == 0.5 || cfg.kappa == 1.0 || cfg.kappa == 1.5 || cfg.kappa == 2.0;
  require(kappa_ok, "compress: kappa must be one of 0.5, 1, 1.5, 2");
  if (cfg.adaptive)
    require(cfg.width == WidthKind::kSingle,
            "compress: adaptive mode supports the single width model only");
}

// ---- raster codec ----------------------------------------------------------

Header fit_raster_header(const Image& img, const CodecConfig& cfg) {
  Header h;
  h.width = img.width;
  h.height = img.height;
  h.scan = ScanMode::kRaster;
  h.kappa = cfg.kappa;
  h.coder = cfg.coder;
  h.adaptive = cfg.adaptive;
  h.symbol_count = static_cast<uint32_t>(img.size());

  std::vector<PixelSample> samples;
  samples.reserve(img.size());
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      samples.push_back({context_at(img, x, y), img.at(x, y) / 255.0});

  if (cfg.predictor == PredictorKind::kLinear) {
    h.pred = fit_linear_predictor(samples);
  } else {
    h.pred.kind = cfg.predictor;
  }

  if (cfg.adaptive) {
    h.width_model.kind = WidthKind::kSingle;
    h.width_model.single_b = kAdaptiveSeedB;
    h.width_model.kappa = cfg.kappa;
    return h;
  }

  std::vector<WidthSample> wsamples(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    double mu = predict_mu(h.pred, samples[i].ctx);
    wsamples[i] = {samples[i].ctx, std::fabs(samples[i].value - mu)};
  }

  switch (cfg.width) {
    case WidthKind::kSingle: {
      std::vector<double> absr(wsamples.size());
      for (size_t i = 0; i < absr.size(); ++i) absr[i] = wsamples[i].abs_residue;
      h.width_model.kind = WidthKind::kSingle;
      h.width_model.single_b = epd_scale(absr, cfg.kappa);
      h.width_model.kappa = cfg.kappa;
      break;
    }
    case WidthKind::kCtx365: {
      std::vector<Ctx4> contexts(samples.size());
      for (size_t i = 0; i < samples.size(); ++i) contexts[i] = samples[i].ctx;
      h.width_model = fit_ctx365(fit_thresholds(contexts), wsamples);
      h.width_model.kappa = cfg.kappa;
      break;
    }
    case WidthKind::kLin4:
    case WidthKind::kLin11:
      h.width_model = epd_fit(cfg.width, wsamples, cfg.kappa);
      break;
  }
  return h;
}

RasterCoder make_raster_coder(const Header& h) {
  RasterCoder rc;
  rc.pred = h.pred;
  rc.width = h.width_model;
  rc.kappa = h.kappa;
  rc.adaptive = h.adaptive;
  rc.reset_adaptive(h.adaptive ? h.width_model.single_b : kAdaptiveSeedB);
  return rc;
}

void encode_raster_payload(const Image& img, const Header& h, SymbolWriter& sink) {
  RasterCoder rc = make_raster_coder(h);
  const BGrid& grid = BGrid::raster();
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      RasterCoder::PixelModel pm = rc.eval(img, x, y);
      int value = img.at(x, y);
      int r = (pm.sign > 0) ? fold_residue(value, pm.mu_int) : fold_residue(pm.mu_int, value);
      sink.put(zigzag(r), pm.level, grid);
      rc.advance(value, pm.mu_int);
    }
}

Image decode_raster_payload(const Header& h, SymbolReader& src) {
  if (h.symbol_count != static_cast<uint32_t>(h.width) * static_cast<uint32_t>(h.height))
    fail("container: symbol count does not match dimensions");
  RasterCoder rc = make_raster_coder(h);
  const BGrid& grid = BGrid::raster();
  Image img(h.width, h.height);
  for (int y = 0; y < h.height; ++y)
    for (int x = 0; x < h.width; ++x) {
      RasterCoder::PixelModel pm = rc.eval(img, x, y);
      int r = unzigzag(src.get(pm.level, grid));
      // sign<0 coded r = fold(mu, x), so x = (mu - r) mod 256.
      int value = unfold_residue(pm.sign > 0 ? r : -r, pm.mu_int);
      img.set(x, y, value);
      rc.advance(value, pm.mu_int);
    }
  return img;
}

// ---- haar codec ------------------------------------------------------------

int floor_log2_int(int v) {
  int l = 0;
  while (v >= 2) {
    v >>= 1;
    ++l;
  }
  return l;
}

HaarPyramid trivial_pyramid(const Image& img) {
  HaarPyramid pyr;
  pyr.cycles = 0;
  pyr.orig_w = pyr.padded_w = img.width;
  pyr.orig_h = pyr.padded_h = img.height;
  Grid g(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) g.set(x, y, img.at(x, y));
  pyr.avg.push_back(std::move(g));
  return pyr;
}

size_t haar_symbol_count(int padded_w, int padded_h) {
  // One degree of freedom per padded sample.
  return static_cast<size_t>(padded_w) * static_cast<size_t>(padded_h);
}

StreamCoder make_stream_coder(const Header& h, const ScanModel& m) {
  StreamCoder sc;
  sc.type = m.type;
  sc.alpha = m.alpha;
  sc.beta = m.beta;
  sc.kappa = h.kappa;
  sc.adaptive = h.adaptive;
  sc.begin(h.adaptive ? h.width_model.single_b : kAdaptiveSeedB);
  return sc;
}

// Codes one grid in raster order; when decoding, `grid` is filled in place.
// The context functions only read cells decoded earlier in scan order, so
// passing the complete grids on the encode side is equivalent.
void code_grid_stream(StreamCoder& sc, Grid& grid, const Grid* a, const Grid* dh,
                      const Grid* dvl, SymbolWriter* sink, SymbolReader* src) {
  const BGrid& bg = sc.grid();
  int alphabet = sc.alphabet();
  int shift = (sc.type == ScanType::kScan0) ? 0 : alphabet / 2;
  std::vector<double> ctx(scan_context_dim(sc.type));
  for (int y = 0; y < grid.h; ++y)
    for (int x = 0; x < grid.w; ++x) {
      switch (sc.type) {
        case ScanType::kScan0:
          scan0_context(grid, x, y, ctx);
          break;
        case ScanType::kDH:
          dh_context(*a, grid, x, y, ctx);
          break;
        case ScanType::kDVL:
          dvl_context(*a, *dh, grid, x, y, ctx);
          break;
        case ScanType::kDVR:
          dvr_context(*a, *dh, *dvl, grid, x, y, ctx);
          break;
      }
      StreamCoder::CellModel cm = sc.eval(ctx);
      if (sink) {
        int value = grid.at(x, y);
        int r = fold_residue(value + shift, cm.mu_int + shift, alphabet);
        sink->put(zigzag(r, alphabet), cm.level, bg);
        sc.advance(value, cm.mu_int);
      } else {
        int r = unzigzag(src->get(cm.level, bg), alphabet);
        int value = unfold_residue(r, cm.mu_int + shift, alphabet) - shift;
        grid.set(x, y, value);
        sc.advance(value, cm.mu_int);
      }
    }
}

Header fit_haar_header(const Image& img, const CodecConfig& cfg, HaarPyramid& pyr) {
  int max_k = floor_log2_int(std::min(img.width, img.height));
  int k_eff = std::min(cfg.cycles, max_k);
  pyr = (k_eff >= 1) ? build_pyramid(img, k_eff) : trivial_pyramid(img);

  Header h;
  h.width = img.width;
  h.height = img.height;
  h.scan = ScanMode::kHaar;
  h.cycles = pyr.cycles;
  h.kappa = cfg.kappa;
  h.coder = cfg.coder;
  h.adaptive = cfg.adaptive;
  size_t symbols = haar_symbol_count(pyr.padded_w, pyr.padded_h);
  require(symbols <= 0xFFFFFFFFull, "compress: image too large for the haar container");
  h.symbol_count = static_cast<uint32_t>(symbols);

  std::vector<ScanModel> models = fit_scan_models(pyr, cfg.share_cycles, cfg.kappa);
  h.haar.share = cfg.share_cycles;
  for (ScanModel& m : models) {
    if (m.type == ScanType::kScan0) {
      h.haar.scan0 = m;
    } else {
      if (h.adaptive) m.beta.clear();  // no width parameters stored
      h.haar.details.push_back(std::move(m));
    }
  }

  h.pred.kind = PredictorKind::kLinear;
  std::copy_n(h.haar.scan0.alpha.begin(), 4, h.pred.alpha.begin());
  if (h.adaptive) {
    h.width_model.kind = WidthKind::kSingle;
    h.width_model.single_b = kAdaptiveSeedB;
  } else {
    h.width_model.kind = WidthKind::kLin4;
    h.width_model.beta = h.haar.scan0.beta;
  }
  h.width_model.kappa = cfg.kappa;
  return h;
}

void encode_haar_payload(const HaarPyramid& pyr, const Header& h, SymbolWriter& sink) {
  HaarPyramid work = pyr;  // code_grid_stream wants mutable grids
  StreamCoder s0 = make_stream_coder(h, h.haar.scan0);
  Grid scan0 = work.scan0();
  code_grid_stream(s0, scan0, nullptr, nullptr, nullptr, &sink, nullptr);
  for (int i = work.cycles - 1; i >= 0; --i) {
    const Grid& a = work.avg[i + 1];
    HaarPyramid::Details& det = work.det[i];
    StreamCoder sdh = make_stream_coder(h, h.haar.find(ScanType::kDH, i));
    code_grid_stream(sdh, det.dh, &a, nullptr, nullptr, &sink, nullptr);
    StreamCoder sdvl = make_stream_coder(h, h.haar.find(ScanType::kDVL, i));
    code_grid_stream(sdvl, det.dvl, &a, &det.dh, nullptr, &sink, nullptr);
    StreamCoder sdvr = make_stream_coder(h, h.haar.find(ScanType::kDVR, i));
    code_grid_stream(sdvr, det.dvr, &a, &det.dh, &det.dvl, &sink, nullptr);
  }
}

Image decode_haar_payload(const Header& h, SymbolReader& src) {
  int mult = 1 << h.cycles;
  int pw = ((h.width + mult - 1) / mult) * mult;
  int ph = ((h.height + mult - 1) / mult) * mult;
  if (haar_symbol_count(pw, ph) != h.symbol_count)
    fail("container: symbol count does not match haar dimensions");

  int sw = pw >> h.cycles, sh = ph >> h.cycles;
  Grid current(sw, sh);
  StreamCoder s0 = make_stream_coder(h, h.haar.scan0);
  code_grid_stream(s0, current, nullptr, nullptr, nullptr, nullptr, &src);

  for (int i = h.cycles - 1; i >= 0; --i) {
    HaarPyramid::Details det{Grid(current.w, current.h), Grid(current.w, current.h),
                             Grid(current.w, current.h)};
    StreamCoder sdh = make_stream_coder(h, h.haar.find(ScanType::kDH, i));
    code_grid_stream(sdh, det.dh, &current, nullptr, nullptr, nullptr, &src);
    StreamCoder sdvl = make_stream_coder(h, h.haar.find(ScanType::kDVL, i));
    code_grid_stream(sdvl, det.dvl, &current, &det.dh, nullptr, nullptr, &src);
    StreamCoder sdvr = make_stream_coder(h, h.haar.find(ScanType::kDVR, i));
    code_grid_stream(sdvr, det.dvr, &current, &det.dh, &det.dvl, nullptr, &src);
    current = reconstruct_level(current, det);
  }

  Image img(h.width, h.height);
  for (int y = 0; y < h.height; ++y)
    for (int x = 0; x < h.width; ++x) {
      int v = current.at(x, y);
      if (v < 0 || v > 255) fail("container: decoded sample out of range");
      img.set(x, y, v);
    }
  return img;
}

}  // namespace

std::vector<uint8_t> compress(const Image& img, const CodecConfig& cfg) {
  validate_config(img, cfg);

  Header h;
  HaarPyramid pyr;
  if (cfg.scan == ScanMode::kRaster) {
    h = fit_raster_header(img, cfg);
  } else {
    h = fit_haar_header(img, cfg, pyr);
  }

  std::vector<uint8_t> out = serialize_header(h);
  SymbolWriter sink;
  sink.coder = cfg.coder;
  if (cfg.scan == ScanMode::kRaster) {
    encode_raster_payload(img, h, sink);
  } else {
    encode_haar_payload(pyr, h, sink);
  }
  std::vector<uint8_t> payload = sink.finish();
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Image decompress(std::span<const uint8_t> bytes) {
  ByteReader r{bytes};
  Header h = parse_header(r);
  SymbolReader src(h.coder, r.rest());
  Image img = (h.scan == ScanMode::kRaster) ? decode_raster_payload(h, src)
                                            : decode_haar_payload(h, src);
  src.check_fully_consumed();
  return img;
}

size_t header_size_bits(const CodecConfig& cfg) {
  size_t bits = (4 + 1 + 2 + 2 + 1) * 8;  // magic, version, dims, scan mode
  if (cfg.scan == ScanMode::kHaar) bits += 8;  // cycles
  // Predictor field: haar always stores scan0's linear alpha.
  bool linear = cfg.scan == ScanMode::kHaar || cfg.predictor == PredictorKind::kLinear;
  bits += 8 + (linear ? 4 * 64 : 0);
  // Width field.
  if (cfg.adaptive) {
    bits += 8 + 64;  // SINGLE seed
  } else if (cfg.scan == ScanMode::kHaar) {
    bits += 8 + 4 * 64;  // scan0 beta, LIN4-shaped
  } else {
    switch (cfg.width) {
      case WidthKind::kSingle:
        bits += 8 + 64;
        break;
      case WidthKind::kCtx365:
        bits += 8 + (24 + kCtxClasses) * 64;
        break;
      case WidthKind::kLin4:
        bits += 8 + 4 * 64;
        break;
      case WidthKind::kLin11:
        bits += 8 + 11 * 64;
        break;
    }
  }
  bits += 64 + 8 + 8 + 32;  // kappa, coder, adaptive, symbol count
  if (cfg.scan == ScanMode::kHaar) {
    bits += 8 + 8;  // share flag, block count
    int blocks = cfg.share_cycles ? 3 : 3 * cfg.cycles;
    int per_cycle_alpha = scan_context_dim(ScanType::kDH) + scan_context_dim(ScanType::kDVL) +
                          scan_context_dim(ScanType::kDVR);
    int per_cycle_beta = cfg.adaptive ? 0
                                      : scan_width_basis_dim(ScanType::kDH) +
                                            scan_width_basis_dim(ScanType::kDVL) +
                                            scan_width_basis_dim(ScanType::kDVR);
    int copies = cfg.share_cycles ? 1 : cfg.cycles;
    bits += static_cast<size_t>(blocks) * 4 * 8;
    bits += static_cast<size_t>(copies) * (per_cycle_alpha + per_cycle_beta) * 64;
  }
  return bits;
}

size_t header_byte_length(std::span<const uint8_t> bytes) {
  ByteReader r{bytes};
  parse_header(r);
  return r.pos;
}

}  // namespace pcld
