#include "pcld/adaptive.hpp"

#include <cmath>

#include "pcld/error.hpp"

namespace pcld {

EmaState ema_update(const EmaState& s, double x) {
  EmaState n = s;
  // theta uses the pre-update mu.
  double dev = std::fabs(x - s.mu);
  double term = (s.kappa == 1.0) ? dev : std::pow(dev, s.kappa);
  n.mu = s.nu * s.mu + (1.0 - s.nu) * x;
  n.theta = s.eta * s.theta + (1.0 - s.eta) * term;
  return n;
}

std::vector<double> weighted_linreg(const Mat& m, std::span<const double> x,
                                    std::span<const double> w) {
  require(m.rows == static_cast<int>(x.size()) && m.rows == static_cast<int>(w.size()),
          "weighted_linreg: shape mismatch");
  NormalEq ne(m.cols);
  std::vector<double> row(m.cols);
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) row[c] = m.at(r, c);
    ne.add(row, x[r], w[r]);
  }
  return ne.solve(0.0, "weighted_linreg: singular system");
}

RegState reg_init(int d, double eta, int warmup) {
  require(d > 0 && eta > 0.0 && eta <= 1.0, "reg_init: bad parameters");
  require(warmup >= d, "reg_init: warmup must cover at least d updates");
  RegState s;
  s.d = d;
  s.eta = eta;
  s.warmup = warmup;
  s.y.assign(d, 0.0);
  s.mhat.assign(static_cast<size_t>(d) * d, 0.0);
  return s;
}

void reg_update(RegState& s, std::span<const double> row, double x) {
  require(static_cast<int>(row.size()) == s.d, "reg_update: row size mismatch");
  for (int i = 0; i < s.d; ++i) {
    s.y[i] = s.eta * (s.y[i] + x * row[i]);
    for (int j = 0; j < s.d; ++j) {
      size_t idx = static_cast<size_t>(i) * s.d + j;
      s.mhat[idx] = s.eta * (s.mhat[idx] + row[i] * row[j]);
    }
  }
  ++s.t;
}

std::vector<double> reg_params(const RegState& s) {
  if (s.t < s.warmup) fail("reg_params: not warmed up");
  return solve_dense(s.mhat, s.y, s.d, "reg_params: singular accumulator");
}

namespace {

// Dense inverse via column-by-column solves; d is small here.
std::vector<double> invert_dense(const std::vector<double>& a, int d, const char* msg) {
  std::vector<double> inv(static_cast<size_t>(d) * d, 0.0);
  for (int c = 0; c < d; ++c) {
    std::vector<double> e(d, 0.0);
    e[c] = 1.0;
    std::vector<double> col = solve_dense(a, std::move(e), d, msg);
    for (int r = 0; r < d; ++r) inv[static_cast<size_t>(r) * d + c] = col[r];
  }
  return inv;
}

std::vector<double> mat_vec(const std::vector<double>& a, std::span<const double> v, int d) {
  std::vector<double> out(d, 0.0);
  for (int r = 0; r < d; ++r) {
    double s = 0.0;
    for (int c = 0; c < d; ++c) s += a[static_cast<size_t>(r) * d + c] * v[c];
    out[r] = s;
  }
  return out;
}

}  // namespace

RegInvState reg_inv_handoff(const RegState& s) {
  if (s.t < s.warmup) fail("reg_inv_handoff: not warmed up");
  RegInvState out;
  out.d = s.d;
  out.eta = s.eta;
  out.y = s.y;
  out.minv = invert_dense(s.mhat, s.d, "reg_inv_handoff: singular accumulator");
  return out;
}

void reg_update_invfree(RegInvState& s, std::span<const double> row, double x) {
  require(static_cast<int>(row.size()) == s.d, "reg_update_invfree: row size mismatch");
  int d = s.d;
  // V' = eta^-1 (V - u (V V u)^T) from (1+z)^-1 ~= 1-z with z = u u^T V.
  std::vector<double> vu = mat_vec(s.minv, row, d);
  std::vector<double> vvu = mat_vec(s.minv, vu, d);
  double inv_eta = 1.0 / s.eta;
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      size_t idx = static_cast<size_t>(r) * d + c;
      s.minv[idx] = inv_eta * (s.minv[idx] - row[r] * vvu[c]);
    }
  for (int i = 0; i < d; ++i) s.y[i] = s.eta * (s.y[i] + x * row[i]);
}

void reg_update_sherman(RegInvState& s, std::span<const double> row, double x) {
  require(static_cast<int>(row.size()) == s.d, "reg_update_sherman: row size mismatch");
  int d = s.d;
  std::vector<double> vu = mat_vec(s.minv, row, d);
  double denom = 1.0;
  for (int i = 0; i < d; ++i) denom += row[i] * vu[i];
  double inv_eta = 1.0 / s.eta;
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      size_t idx = static_cast<size_t>(r) * d + c;
      s.minv[idx] = inv_eta * (s.minv[idx] - vu[r] * vu[c] / denom);
    }
  for (int i = 0; i < d; ++i) s.y[i] = s.eta * (s.y[i] + x * row[i]);
}

std::vector<double> reg_inv_params(const RegInvState& s) {
  return mat_vec(s.minv, s.y, s.d);
}

double newton_step(double grad, double hess, double theta_star) {
  if (std::fabs(hess) < 1e-12) fail("newton_step: degenerate curvature");
  return theta_star - grad / hess;
}

double gradient_step(double theta, double grad, double rate) {
  return theta - rate * grad;
}

void criterion_accumulate(CriterionState& s, double f, double f_prime, double f_second) {
  s.value = s.eta * s.value + f;
  s.grad = s.eta * s.grad + f_prime;
  s.hess = s.eta * s.hess + f_second;
  ++s.steps;
}

double criterion_newton(const CriterionState& s) {
  return newton_step(s.grad, s.hess, s.theta_star);
}

AnchoredNewton anchored_newton_init(double theta0, double eta, int refresh_period) {
  require(refresh_period > 0, "anchored_newton_init: bad period");
  AnchoredNewton s;
  s.eta = eta;
  s.refresh_period = refresh_period;
  s.active = CriterionState{theta0, eta, 0, 0, 0, 0};
  s.building = CriterionState{theta0, eta, 0, 0, 0, 0};
  return s;
}

double anchored_newton_update(AnchoredNewton& s, double f_a, double fp_a, double fpp_a,
                              double f_b, double fp_b, double fpp_b) {
  criterion_accumulate(s.active, f_a, fp_a, fpp_a);
  criterion_accumulate(s.building, f_b, fp_b, fpp_b);
  ++s.steps;
  double estimate = std::fabs(s.active.hess) < 1e-12 ? s.active.theta_star
                                                     : criterion_newton(s.active);
  if (s.steps % s.refresh_period == 0) {
    // Promote the building accumulator and start a fresh one at the current
    // estimate.
    s.active = s.building;
    s.building = CriterionState{estimate, s.eta, 0, 0, 0, 0};
  }
  return estimate;
}

std::pair<ParabolaState, double> parabola_update(const ParabolaState& s, double theta,
                                                 double g) {
  ParabolaState n = s;
  double keep = s.eta;
  double add = 1.0 - s.eta;
  n.avg_theta = keep * s.avg_theta + add * theta;
  n.avg_g = keep * s.avg_g + add * g;
  n.avg_gtheta = keep * s.avg_gtheta + add * g * theta;
  n.avg_theta2 = keep * s.avg_theta2 + add * theta * theta;
  n.weight = keep * s.weight + add;

  double tbar = n.avg_theta / n.weight;
  double gbar = n.avg_g / n.weight;
  double gtbar = n.avg_gtheta / n.weight;
  double t2bar = n.avg_theta2 / n.weight;
  double var = t2bar - tbar * tbar;
  if (!(var > 0.0)) return {n, theta};  // no spread yet: do not move

  double lambda = (gtbar - gbar * tbar) / var;
  double rate = (lambda == 0.0) ? 1.0 / n.eps
                                : std::min(1.0 / std::fabs(lambda), 1.0 / n.eps);
  double p = tbar - rate * gbar;
  return {n, n.alpha * p + (1.0 - n.alpha) * theta};
}

std::pair<double, double> parabola_fit(const ParabolaState& s) {
  require(s.weight > 0.0, "parabola_fit: no observations");
  double tbar = s.avg_theta / s.weight;
  double gbar = s.avg_g / s.weight;
  double gtbar = s.avg_gtheta / s.weight;
  double t2bar = s.avg_theta2 / s.weight;
  double var = t2bar - tbar * tbar;
  require(var > 0.0, "parabola_fit: zero variance");
  double lambda = (gtbar - gbar * tbar) / var;
  require(lambda != 0.0, "parabola_fit: flat gradient trend");
  return {lambda, tbar - gbar / lambda};
}

}  // namespace pcld
