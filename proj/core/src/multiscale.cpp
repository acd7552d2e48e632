#include "pcld/multiscale.hpp"

#include <algorithm>
#include <cmath>

#include "pcld/error.hpp"
#include "pcld/linalg.hpp"

namespace pcld {

namespace {

constexpr double kInv255 = 1.0 / 255.0;
constexpr double kMinB = 0.001;
constexpr double kMinTheta = 1e-6;

inline int ceil_half(int d) { return (d + 1) >> 1; }  // arithmetic shift floors

inline int floor_log2(int v) {
  int l = 0;
  while (v >= 2) {
    v >>= 1;
    ++l;
  }
  return l;
}

// Left column average derived from a and dh, as the inverse lifting does.
inline int derived_al(const Grid& a, const Grid& dh, int x, int y) {
  return a.at(x, y) + ceil_half(dh.at(x, y));
}
inline int derived_ar(const Grid& a, const Grid& dh, int x, int y) {
  return derived_al(a, dh, x, y) - dh.at(x, y);
}

}  // namespace

HaarBlock haar_forward_block(int v00, int v01, int v10, int v11) {
  int al = (v00 + v10) >> 1;
  int dvl = v00 - v10;
  int ar = (v01 + v11) >> 1;
  int dvr = v01 - v11;
  HaarBlock blk;
  blk.a = (al + ar) >> 1;
  blk.dh = al - ar;
  blk.dvl = dvl;
  blk.dvr = dvr;
  return blk;
}

std::array<int, 4> haar_inverse_block(const HaarBlock& blk) {
  int al = blk.a + ceil_half(blk.dh);
  int ar = al - blk.dh;
  int v00 = al + ceil_half(blk.dvl);
  int v10 = v00 - blk.dvl;
  int v01 = ar + ceil_half(blk.dvr);
  int v11 = v01 - blk.dvr;
  return {v00, v01, v10, v11};
}

HaarPyramid build_pyramid(const Image& img, int k) {
  require(k >= 1, "build_pyramid: cycle count must be >= 1");
  int max_k = floor_log2(std::min(img.width, img.height));
  if (k > max_k) fail("build_pyramid: cycle count exceeds floor(log2(min dim))");

  int mult = 1 << k;
  int pw = ((img.width + mult - 1) / mult) * mult;
  int ph = ((img.height + mult - 1) / mult) * mult;

  HaarPyramid pyr;
  pyr.cycles = k;
  pyr.orig_w = img.width;
  pyr.orig_h = img.height;
  pyr.padded_w = pw;
  pyr.padded_h = ph;

  Grid base(pw, ph);
  for (int y = 0; y < ph; ++y)
    for (int x = 0; x < pw; ++x)
      base.set(x, y, img.at(std::min(x, img.width - 1), std::min(y, img.height - 1)));
  pyr.avg.push_back(std::move(base));

  for (int i = 0; i < k; ++i) {
    const Grid& fine = pyr.avg[i];
    int cw = fine.w / 2, ch = fine.h / 2;
    Grid coarse(cw, ch);
    HaarPyramid::Details det{Grid(cw, ch), Grid(cw, ch), Grid(cw, ch)};
    for (int y = 0; y < ch; ++y)
      for (int x = 0; x < cw; ++x) {
        HaarBlock blk = haar_forward_block(fine.at(2 * x, 2 * y), fine.at(2 * x + 1, 2 * y),
                                           fine.at(2 * x, 2 * y + 1), fine.at(2 * x + 1, 2 * y + 1));
        coarse.set(x, y, blk.a);
        det.dh.set(x, y, blk.dh);
        det.dvl.set(x, y, blk.dvl);
        det.dvr.set(x, y, blk.dvr);
      }
    pyr.avg.push_back(std::move(coarse));
    pyr.det.push_back(std::move(det));
  }
  return pyr;
}

Grid reconstruct_level(const Grid& coarse, const HaarPyramid::Details& det) {
  Grid fine(coarse.w * 2, coarse.h * 2);
  for (int y = 0; y < coarse.h; ++y)
    for (int x = 0; x < coarse.w; ++x) {
      HaarBlock blk{coarse.at(x, y), det.dh.at(x, y), det.dvl.at(x, y), det.dvr.at(x, y)};
      std::array<int, 4> v = haar_inverse_block(blk);
      fine.set(2 * x, 2 * y, v[0]);
      fine.set(2 * x + 1, 2 * y, v[1]);
      fine.set(2 * x, 2 * y + 1, v[2]);
      fine.set(2 * x + 1, 2 * y + 1, v[3]);
    }
  return fine;
}

Image reconstruct_image(const HaarPyramid& pyr) {
  Grid cur = pyr.scan0();
  for (int i = pyr.cycles - 1; i >= 0; --i) cur = reconstruct_level(cur, pyr.det[i]);
  Image img(pyr.orig_w, pyr.orig_h);
  for (int y = 0; y < pyr.orig_h; ++y)
    for (int x = 0; x < pyr.orig_w; ++x) img.set(x, y, cur.at(x, y));
  return img;
}

std::vector<ScanRef> scan_order(int cycles) {
  std::vector<ScanRef> order;
  order.push_back({ScanType::kScan0, -1});
  for (int i = cycles - 1; i >= 0; --i) {
    order.push_back({ScanType::kDH, i});
    order.push_back({ScanType::kDVL, i});
    order.push_back({ScanType::kDVR, i});
  }
  return order;
}

int scan_context_dim(ScanType type) {
  switch (type) {
    case ScanType::kScan0:
      return 4;
    case ScanType::kDH:
      return 5;
    case ScanType::kDVL:
      return 6;
    case ScanType::kDVR:
      return 7;
  }
  fail("scan_context_dim: unknown scan type");
}

int scan_width_basis_dim(ScanType type) {
  switch (type) {
    case ScanType::kScan0:
      return 4;
    case ScanType::kDH:
      return 5;
    case ScanType::kDVL:
      return 5;
    case ScanType::kDVR:
      return 6;
  }
  fail("scan_width_basis_dim: unknown scan type");
}

void scan0_context(const Grid& g, int x, int y, std::span<double> out) {
  // Same border rule as the raster path.
  if (y == 0) {
    double v = (x == 0) ? 0.5 : g.at(x - 1, 0) * kInv255;
    out[0] = out[1] = out[2] = out[3] = v;
    return;
  }
  double b = g.at(x, y - 1) * kInv255;
  out[0] = (x > 0) ? g.at(x - 1, y) * kInv255 : b;
  out[1] = b;
  out[2] = (x > 0) ? g.at(x - 1, y - 1) * kInv255 : b;
  out[3] = (x < g.w - 1) ? g.at(x + 1, y - 1) * kInv255 : b;
}

void dh_context(const Grid& a, const Grid& dh, int x, int y, std::span<double> out) {
  double cur = a.at(x, y) * kInv255;
  out[0] = cur;
  out[1] = (x > 0) ? a.at(x - 1, y) * kInv255 : cur;
  out[2] = (x < a.w - 1) ? a.at(x + 1, y) * kInv255 : cur;
  out[3] = (y > 0) ? a.at(x, y - 1) * kInv255 : cur;
  out[4] = (y > 0) ? dh.at(x, y - 1) * kInv255 : 0.0;
}

void dvl_context(const Grid& a, const Grid& dh, const Grid& dvl, int x, int y,
                 std::span<double> out) {
  double al = derived_al(a, dh, x, y) * kInv255;
  out[0] = a.at(x, y) * kInv255;
  out[1] = al;
  out[2] = derived_ar(a, dh, x, y) * kInv255;
  out[3] = (x > 0) ? derived_al(a, dh, x - 1, y) * kInv255 : al;
  out[4] = (y > 0) ? derived_al(a, dh, x, y - 1) * kInv255 : al;
  out[5] = (y > 0) ? dvl.at(x, y - 1) * kInv255 : 0.0;
}

void dvr_context(const Grid& a, const Grid& dh, const Grid& dvl, const Grid& dvr, int x,
                 int y, std::span<double> out) {
  double ar = derived_ar(a, dh, x, y) * kInv255;
  out[0] = a.at(x, y) * kInv255;
  out[1] = derived_al(a, dh, x, y) * kInv255;
  out[2] = ar;
  out[3] = (x > 0) ? derived_ar(a, dh, x - 1, y) * kInv255 : ar;
  out[4] = (y > 0) ? derived_ar(a, dh, x, y - 1) * kInv255 : ar;
  out[5] = (y > 0) ? dvr.at(x, y - 1) * kInv255 : 0.0;
  out[6] = dvl.at(x, y) * kInv255;
}

std::vector<double> scan_context(const HaarPyramid& pyr, ScanType type, int det_index,
                                 int x, int y) {
  std::vector<double> out(scan_context_dim(type));
  if (type == ScanType::kScan0) {
    scan0_context(pyr.scan0(), x, y, out);
    return out;
  }
  require(det_index >= 0 && det_index < pyr.cycles, "scan_context: bad det index");
  const Grid& a = pyr.avg[det_index + 1];
  const HaarPyramid::Details& det = pyr.det[det_index];
  switch (type) {
    case ScanType::kDH:
      dh_context(a, det.dh, x, y, out);
      break;
    case ScanType::kDVL:
      dvl_context(a, det.dh, det.dvl, x, y, out);
      break;
    case ScanType::kDVR:
      dvr_context(a, det.dh, det.dvl, det.dvr, x, y, out);
      break;
    default:
      fail("scan_context: unknown scan type");
  }
  return out;
}

void scan_width_basis(ScanType type, std::span<const double> ctx, std::span<double> out) {
  auto p8 = [](double x) { return std::pow(std::fabs(x), 0.8); };
  out[0] = 1.0;
  switch (type) {
    case ScanType::kScan0:
      // Contexts are (A,B,C,D): the raster b4 differences.
      out[1] = p8(ctx[2] - ctx[0]);
      out[2] = p8(ctx[1] - ctx[2]);
      out[3] = p8(ctx[3] - ctx[1]);
      break;
    case ScanType::kDH:
      out[1] = p8(ctx[1] - ctx[0]);
      out[2] = p8(ctx[2] - ctx[0]);
      out[3] = p8(ctx[3] - ctx[0]);
      out[4] = p8(ctx[4]);
      break;
    case ScanType::kDVL:
      out[1] = p8(ctx[1] - ctx[2]);
      out[2] = p8(ctx[3] - ctx[1]);
      out[3] = p8(ctx[4] - ctx[1]);
      out[4] = p8(ctx[5]);
      break;
    case ScanType::kDVR:
      out[1] = p8(ctx[1] - ctx[2]);
      out[2] = p8(ctx[3] - ctx[2]);
      out[3] = p8(ctx[4] - ctx[2]);
      out[4] = p8(ctx[5]);
      out[5] = p8(ctx[6]);
      break;
  }
}

namespace {

struct ScanSamples {
  std::vector<std::vector<double>> ctx;
  std::vector<double> target;
};

ScanSamples collect_samples(const HaarPyramid& pyr, ScanType type, int det_index) {
  ScanSamples s;
  const Grid* grid;
  if (type == ScanType::kScan0) {
    grid = &pyr.scan0();
  } else {
    const HaarPyramid::Details& d = pyr.det[det_index];
    grid = (type == ScanType::kDH) ? &d.dh : (type == ScanType::kDVL) ? &d.dvl : &d.dvr;
  }
  s.ctx.reserve(grid->size());
  s.target.reserve(grid->size());
  for (int y = 0; y < grid->h; ++y)
    for (int x = 0; x < grid->w; ++x) {
      s.ctx.push_back(scan_context(pyr, type, det_index, x, y));
      s.target.push_back(grid->at(x, y) * kInv255);
    }
  return s;
}

ScanModel fit_one(ScanType type, int det_index, const ScanSamples& s, double kappa) {
  int d = scan_context_dim(type);
  NormalEq ne(d);
  for (size_t i = 0; i < s.target.size(); ++i) ne.add(s.ctx[i], s.target[i]);
  ScanModel m;
  m.type = type;
  m.det_index = det_index;
  m.alpha = ne.solve(1e-9, "degenerate scan sample");

  int bd = scan_width_basis_dim(type);
  NormalEq wne(bd);
  std::vector<double> basis(bd);
  for (size_t i = 0; i < s.target.size(); ++i) {
    double res = std::fabs(s.target[i] - dot(m.alpha, s.ctx[i]));
    scan_width_basis(type, s.ctx[i], basis);
    wne.add(basis, kappa == 1.0 ? res : std::pow(res, kappa));
  }
  m.beta = wne.solve(1e-9, "degenerate scan sample");
  return m;
}

}  // namespace

std::vector<ScanModel> fit_scan_models(const HaarPyramid& pyr, bool share_cycles,
                                       double kappa) {
  std::vector<ScanModel> models;
  if (share_cycles) {
    for (ScanType type : {ScanType::kScan0, ScanType::kDH, ScanType::kDVL, ScanType::kDVR}) {
      ScanSamples pooled;
      if (type == ScanType::kScan0) {
        pooled = collect_samples(pyr, type, -1);
      } else {
        for (int i = pyr.cycles - 1; i >= 0; --i) {
          ScanSamples s = collect_samples(pyr, type, i);
          pooled.ctx.insert(pooled.ctx.end(), s.ctx.begin(), s.ctx.end());
          pooled.target.insert(pooled.target.end(), s.target.begin(), s.target.end());
        }
        if (pooled.target.empty()) continue;  // zero cycles
      }
      models.push_back(fit_one(type, -1, pooled, kappa));
    }
    return models;
  }
  for (const ScanRef& ref : scan_order(pyr.cycles)) {
    ScanSamples s = collect_samples(pyr, ref.type, ref.det_index);
    models.push_back(fit_one(ref.type, ref.det_index, s, kappa));
  }
  return models;
}

double predict_scan_mu(std::span<const double> alpha, std::span<const double> ctx) {
  return dot(alpha, ctx);
}

double predict_scan_b(std::span<const double> beta, ScanType type,
                      std::span<const double> ctx, double kappa) {
  std::vector<double> basis(scan_width_basis_dim(type));
  scan_width_basis(type, ctx, basis);
  double theta = dot(beta, basis);
  if (kappa == 1.0) return std::max(theta, kMinB);
  return std::pow(std::max(theta, kMinTheta), 1.0 / kappa);
}

}  // namespace pcld
