#include "pcld/linalg.hpp"

#include <cmath>
#include <cstdlib>

#include "pcld/error.hpp"

namespace pcld {

std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b,
                                int d, const char* singular_msg, double rel_pivot) {
  require(static_cast<int>(b.size()) == d && a.size() == static_cast<size_t>(d) * d,
          "solve_dense: shape mismatch");
  double scale = 0.0;
  for (int i = 0; i < d; ++i) scale = std::max(scale, std::fabs(a[static_cast<size_t>(i) * d + i]));
  if (scale == 0.0) scale = 1.0;
  double threshold = std::max(rel_pivot * scale, 1e-300);

  for (int col = 0; col < d; ++col) {
    int pivot = col;
    double best = std::fabs(a[static_cast<size_t>(col) * d + col]);
    for (int r = col + 1; r < d; ++r) {
      double cand = std::fabs(a[static_cast<size_t>(r) * d + col]);
      if (cand > best) {
        best = cand;
        pivot = r;
      }
    }
    if (!(best > threshold)) fail(singular_msg);
    if (pivot != col) {
      for (int c = 0; c < d; ++c)
        std::swap(a[static_cast<size_t>(pivot) * d + c], a[static_cast<size_t>(col) * d + c]);
      std::swap(b[pivot], b[col]);
    }
    double inv = 1.0 / a[static_cast<size_t>(col) * d + col];
    for (int r = col + 1; r < d; ++r) {
      double f = a[static_cast<size_t>(r) * d + col] * inv;
      if (f == 0.0) continue;
      for (int c = col; c < d; ++c)
        a[static_cast<size_t>(r) * d + c] -= f * a[static_cast<size_t>(col) * d + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(d, 0.0);
  for (int r = d - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < d; ++c) s -= a[static_cast<size_t>(r) * d + c] * x[c];
    x[r] = s / a[static_cast<size_t>(r) * d + r];
  }
  return x;
}

void NormalEq::add(std::span<const double> row, double target, double weight) {
  require(static_cast<int>(row.size()) == d_, "NormalEq: row size mismatch");
  for (int i = 0; i < d_; ++i) {
    double wi = weight * row[i];
    for (int j = i; j < d_; ++j) ata_[static_cast<size_t>(i) * d_ + j] += wi * row[j];
    atb_[i] += wi * target;
  }
  ++n_;
}

std::vector<double> NormalEq::solve(double ridge, const char* singular_msg) const {
  std::vector<double> a(ata_);
  for (int i = 0; i < d_; ++i) {
    for (int j = 0; j < i; ++j)
      a[static_cast<size_t>(i) * d_ + j] = a[static_cast<size_t>(j) * d_ + i];
    a[static_cast<size_t>(i) * d_ + i] += ridge;
  }
  // With a ridge the system is positive definite and pivots legitimately sit
  // near the ridge value, so only the underflow floor applies.
  return solve_dense(std::move(a), atb_, d_, singular_msg, ridge > 0.0 ? 0.0 : 1e-12);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  size_t n = std::min(a.size(), b.size());
  for (size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace pcld
