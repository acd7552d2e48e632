#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "pcld/image.hpp"

namespace pcld {

/// Integer grid holding block averages (0..255) or detail values (-255..255).
struct Grid {
  int w = 0;
  int h = 0;
  std::vector<int> v;

  Grid() = default;
  Grid(int width, int height) : w(width), h(height), v(static_cast<size_t>(width) * height, 0) {}
  int at(int x, int y) const { return v[static_cast<size_t>(y) * w + x]; }
  void set(int x, int y, int val) { v[static_cast<size_t>(y) * w + x] = val; }
  size_t size() const { return v.size(); }
};

/// One reversible 2x2 lifting step: column averages/differences first, then
/// the horizontal average/difference of those.
struct HaarBlock {
  int a = 0;    // floor average of the whole block
  int dh = 0;   // aL - aR
  int dvl = 0;  // v00 - v10
  int dvr = 0;  // v01 - v11
};

/// (v00 v01 / v10 v11) row-major corners in [0,255] (or any integers).
HaarBlock haar_forward_block(int v00, int v01, int v10, int v11);
/// Exact inverse; x = s + ceil(d/2), y = x - d per pair.
std::array<int, 4> haar_inverse_block(const HaarBlock& blk);

/// Coarse-to-fine decomposition. avg[0] is the edge-padded source,
/// avg[cycles] is the scan-0 grid; det[i] holds the detail grids produced
/// when reducing avg[i] to avg[i+1] (same dimensions as avg[i+1]).
struct HaarPyramid {
  struct Details {
    Grid dh, dvl, dvr;
  };
  int cycles = 0;
  int orig_w = 0, orig_h = 0;
  int padded_w = 0, padded_h = 0;
  std::vector<Grid> avg;
  std::vector<Details> det;

  const Grid& scan0() const { return avg[cycles]; }
};

/// Requires 1 <= k <= floor(log2(min(width,height))); pads odd extents by
/// edge replication up to multiples of 2^k.
HaarPyramid build_pyramid(const Image& img, int k);

/// Undo one cycle: coarse averages plus details back to the finer grid.
Grid reconstruct_level(const Grid& coarse, const HaarPyramid::Details& det);

/// Full inverse, cropped to the original extent. reconstruct(build(img,k)) == img.
Image reconstruct_image(const HaarPyramid& pyr);

enum class ScanType : uint8_t { kScan0 = 0, kDH = 1, kDVL = 2, kDVR = 3 };

/// Decode order: scan0 raster, then per cycle coarse-to-fine the dH, dVl, dVr
/// grids (det index cycles-1 down to 0), each in raster order.
struct ScanRef {
  ScanType type;
  int det_index;  // -1 for scan0
};
std::vector<ScanRef> scan_order(int cycles);

int scan_context_dim(ScanType type);    // 4, 5, 6, 7
int scan_width_basis_dim(ScanType type);  // 4, 5, 5, 6

/// Context vectors normalized by 255; averages in [0,1], differences in
/// [-1,1]. Missing neighbors substitute the current block's value (averages)
/// or 0 (differences). Only causally decoded cells are read.
void scan0_context(const Grid& g, int x, int y, std::span<double> out);
void dh_context(const Grid& a, const Grid& dh, int x, int y, std::span<double> out);
void dvl_context(const Grid& a, const Grid& dh, const Grid& dvl, int x, int y,
                 std::span<double> out);
void dvr_context(const Grid& a, const Grid& dh, const Grid& dvl, const Grid& dvr, int x,
                 int y, std::span<double> out);

/// Dispatcher over a fully built pyramid (fitting and audits); det_index is
/// ignored for scan0.
std::vector<double> scan_context(const HaarPyramid& pyr, ScanType type, int det_index,
                                 int x, int y);

/// Width basis [1, |difference components|^0.8] for a scan's context.
void scan_width_basis(ScanType type, std::span<const double> ctx, std::span<double> out);

/// Per-scan linear predictor and width coefficients.
struct ScanModel {
  ScanType type = ScanType::kScan0;
  int det_index = -1;  // -1: scan0 or shared across cycles
  std::vector<double> alpha;
  std::vector<double> beta;
};

/// Least-squares alpha (ridge 1e-9) of targets on contexts, then beta of
/// |residue|^kappa on the width basis, per scan; share_cycles pools the three
/// detail scan types across cycles.
std::vector<ScanModel> fit_scan_models(const HaarPyramid& pyr, bool share_cycles,
                                       double kappa);

double predict_scan_mu(std::span<const double> alpha, std::span<const double> ctx);
/// Clamped width from the scan basis; kappa treated as in the width module.
double predict_scan_b(std::span<const double> beta, ScanType type,
                      std::span<const double> ctx, double kappa);

}  // namespace pcld
