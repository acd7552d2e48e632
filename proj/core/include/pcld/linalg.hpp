#pragma once

#include <span>
#include <vector>

namespace pcld {

/// Minimal row-major dense matrix used by the fitting and adaptive paths.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0) {}
  double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
};

/// Solve A x = b for a d x d system by Gaussian elimination with partial
/// pivoting. A is row-major, length d*d. Throws Error(singular_msg) when a
/// pivot falls below rel_pivot * max diagonal (rel_pivot = 0 keeps only an
/// absolute underflow floor, for ridge-stabilized systems whose pivots sit
/// near the ridge itself).
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b,
                                int d, const char* singular_msg,
                                double rel_pivot = 1e-12);

/// Accumulates normal equations sum(row^T row) and sum(row * target) in a
/// fixed (sample) order, then solves with an optional ridge on the diagonal.
class NormalEq {
 public:
  explicit NormalEq(int d) : d_(d), ata_(static_cast<size_t>(d) * d, 0.0), atb_(d, 0.0) {}

  void add(std::span<const double> row, double target, double weight = 1.0);

  /// Least-squares solution of the accumulated system; ridge is added to the
  /// diagonal before solving.
  std::vector<double> solve(double ridge, const char* singular_msg) const;

  int dim() const { return d_; }
  size_t count() const { return n_; }

 private:
  int d_;
  size_t n_ = 0;
  std::vector<double> ata_;
  std::vector<double> atb_;
};

/// Dot product with a fixed left-to-right accumulation order (the decode-path
/// determinism contract).
double dot(std::span<const double> a, std::span<const double> b);

}  // namespace pcld
