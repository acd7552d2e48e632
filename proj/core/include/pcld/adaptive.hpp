#pragma once

#include <span>
#include <utility>
#include <vector>

#include "pcld/linalg.hpp"

namespace pcld {

/// Evolving Laplace/exponential-power estimate: mu via EMA of the stream,
/// theta (= b^kappa) via EMA of |x - mu|^kappa using the pre-update mu.
struct EmaState {
  double mu = 0;
  double theta = 0;
  double nu = 0.99;   // mu learning rate
  double eta = 0.99;  // theta learning rate
  double kappa = 1.0;
};

EmaState ema_update(const EmaState& s, double x);

/// beta = (M^T diag(w) M)^-1 M^T diag(w) x. Throws on a singular system.
std::vector<double> weighted_linreg(const Mat& m, std::span<const double> x,
                                    std::span<const double> w);

/// Recurrence state for exponentially forgetting least squares:
/// y <- eta (y + x row), Mhat <- eta (Mhat + row row^T).
struct RegState {
  int d = 0;
  double eta = 1.0;
  int warmup = 0;
  int t = 0;
  std::vector<double> y;     // d
  std::vector<double> mhat;  // d*d row-major
};

RegState reg_init(int d, double eta, int warmup);
void reg_update(RegState& s, std::span<const double> row, double x);
/// beta = Mhat^-1 y. Throws "not warmed up" before warmup updates.
std::vector<double> reg_params(const RegState& s);

/// Inverse-carrying variant (post-warmup handoff from RegState).
struct RegInvState {
  int d = 0;
  double eta = 1.0;
  std::vector<double> y;     // d
  std::vector<double> minv;  // d*d row-major, (Mhat)^-1
};

RegInvState reg_inv_handoff(const RegState& s);
/// First-order expansion of (1 + row row^T V)^-1: approximate, drifts with
/// step size.
void reg_update_invfree(RegInvState& s, std::span<const double> row, double x);
/// Exact rank-1 (Sherman-Morrison) update; matches full inversion.
void reg_update_sherman(RegInvState& s, std::span<const double> row, double x);
std::vector<double> reg_inv_params(const RegInvState& s);

/// theta* - grad/hess; throws "degenerate curvature" for |hess| < 1e-12.
double newton_step(double grad, double hess, double theta_star);

/// Plain first-order step, kept as a baseline.
double gradient_step(double theta, double grad, double rate);

/// Evolving criterion F <- eta F + f(x, .) tracked through its value and
/// first two derivatives at a fixed anchor theta*; the caller evaluates the
/// pointwise terms there.
struct CriterionState {
  double theta_star = 0;
  double eta = 0.9;
  double value = 0;
  double grad = 0;
  double hess = 0;
  long steps = 0;
};

void criterion_accumulate(CriterionState& s, double f, double f_prime, double f_second);
/// Newton estimate from the accumulated derivatives.
double criterion_newton(const CriterionState& s);

/// Two-anchor tracker: estimates come from the active anchor while a second
/// accumulator builds at a newer one; anchors swap every refresh_period steps.
struct AnchoredNewton {
  double eta = 0.9;
  int refresh_period = 64;
  CriterionState active;
  CriterionState building;
  long steps = 0;
};

AnchoredNewton anchored_newton_init(double theta0, double eta, int refresh_period = 64);
/// The caller supplies (f, f', f'') at both anchor points for the newest
/// observation; returns the current parameter estimate.
double anchored_newton_update(AnchoredNewton& s, double f_a, double fp_a, double fpp_a,
                              double f_b, double fp_b, double fpp_b);

/// Online parabola model for (theta, gradient) pairs: four EMA moments plus a
/// weight normalizer; lambda = cov(g,theta)/var(theta), p = mean(theta) -
/// rate*mean(g) with rate = min(1/|lambda|, 1/eps).
struct ParabolaState {
  double avg_theta = 0;
  double avg_g = 0;
  double avg_gtheta = 0;
  double avg_theta2 = 0;
  double weight = 0;  // EMA of 1, normalizes the moments
  double eta = 0.95;
  double alpha = 0.3;  // trust in the model step
  double eps = 1e-3;   // rate cap is 1/eps
};

/// Returns the updated state and the next parameter value
/// alpha*p + (1-alpha)*theta; with zero variance the parameter does not move.
std::pair<ParabolaState, double> parabola_update(const ParabolaState& s, double theta,
                                                 double g);

/// Fitted (lambda, p) from the current moments; requires positive variance.
std::pair<double, double> parabola_fit(const ParabolaState& s);

}  // namespace pcld
