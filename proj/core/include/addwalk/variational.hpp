// Frequency-side variational constants of the walk models.
//
// The moderate-deviation rate and iterated-logarithm constants of the
// additive-walk local time are powers of two variational quantities: with
// weight w(lambda) = (1 + Psi(lambda))^(-1/2) and u = g w, define the overlap
//   H_g(lambda) = integral of u(lambda + gamma) u(gamma) d gamma,
// and maximize
//   F_e(g) = integral of [H_g]^e          over the L2 unit sphere ||g|| = 1,
// with e = p for the first constant and e = 2p for the second.
//
// Discretization: a symmetric midpoint grid lambda_i = -L + (i + 1/2) h,
// h = 2L/N. Differences of nodes land exactly on the step-h difference grid,
// so H_g is an autocorrelation (computed via FFT) and the functional, its
// gradient, and the Hoelder-dual kernel eigenvalue problem are all exact
// statements about the discretized measure. The cutoff error decays like
// 1/L, so values at cutoffs L, L/2, L/4 admit one Aitken extrapolation; the
// raw full-cutoff value is itself a lower estimate (the discrete trial
// function family only shrinks the supremum, up to quadrature error).
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "addwalk/walk_model.hpp"

namespace addwalk {

// Symmetric midpoint grid on [-lambda_max, lambda_max], d = 1. `points`
// must be a positive multiple of 4 so the half- and quarter-cutoff grids are
// exact subsets.
struct FrequencyGrid {
  double lambda_max = 16.0;
  int points = 1024;

  double h() const { return 2.0 * lambda_max / points; }
  double node(int i) const { return -lambda_max + (i + 0.5) * h(); }
};

struct AscentOptions {
  int max_iterations = 10000;
  double tolerance = 1e-10;  // relative objective gain per step at stop
};

struct VariationalResult {
  double value = 0.0;         // objective at the grid optimum (full cutoff)
  double extrapolated = 0.0;  // Aitken extrapolation over cutoffs L, L/2, L/4
  double cutoff_values[3] = {0.0, 0.0, 0.0};  // at L, L/2, L/4
  int iterations = 0;         // ascent iterations at the full cutoff
  double grad_norm = 0.0;     // projected-gradient L2 norm at the optimum
  std::vector<double> optimizer;  // g on the grid, h * sum g^2 = 1
  // Objective after each accepted ascent step at the full cutoff (first entry
  // is the initial value); strictly increasing by construction.
  std::vector<double> objective_trace;
};

// Objective F_e and its gradient on an explicit grid; exposed so tests can
// finite-difference the gradient. `w` holds the weight values at the nodes.
double overlap_objective(const std::vector<double>& g,
                         const std::vector<double>& w, double h, int e);
std::vector<double> overlap_gradient(const std::vector<double>& g,
                                     const std::vector<double>& w, double h,
                                     int e);

// Projected gradient ascent for sup F_e over the discrete unit sphere,
// initialized at g proportional to w (the exact optimizer when e = 1).
// Deterministic; no randomness anywhere.
VariationalResult maximize_overlap_functional(const WalkModel& model, int e,
                                              const FrequencyGrid& grid,
                                              const AscentOptions& opt = {});

// The two rate constants: rho1 = sup integral [H_g]^p, rho2 with 2p.
// Returned value is the cutoff-extrapolated estimate.
double rho1(const WalkModel& model, int p, const FrequencyGrid& grid);
double rho2(const WalkModel& model, int p, const FrequencyGrid& grid);

// Largest eigenvalue of the symmetric kernel f(lambda - gamma) w(lambda)
// w(gamma) on the grid (power iteration with a spectral shift; the table
// form takes f on the difference grid, f_diff[k] = f((k - (N-1)) h) for
// k = 0..2N-2).
double rho_of_f(const WalkModel& model, const std::vector<double>& f_diff,
                const FrequencyGrid& grid);
double rho_of_f(const WalkModel& model,
                const std::function<double(double)>& f,
                const FrequencyGrid& grid);

// Exact cell averages of the centered box height * 1_[-half_width, half_width]
// on the difference grid (2N-1 entries). A discontinuous f sampled pointwise
// would hand the kernel an O(h) edge bias; averaging over each difference
// cell removes it.
std::vector<double> indicator_difference_table(const FrequencyGrid& grid,
                                               double half_width,
                                               double height);

// Hoelder duality: sup over ||f||_q = 1 (q conjugate to e) of rho(f) equals
// (sup F_e)^(1/e), attained at f proportional to H^(e-1) of the optimizer.
// Builds that trial f from the ascent optimum and reports the relative gap
// between rho(f_trial) and the e-th root of the on-grid optimum.
struct DualityReport {
  double rho_trial = 0.0;
  double root_value = 0.0;
  double rel_gap = 0.0;
};
DualityReport duality_consistency(const WalkModel& model, int e,
                                  const FrequencyGrid& grid);

// Independent position-side check of rho(f) for the indicator trial
// f = (1/2) 1_[-1,1]. For a square-integrable model (Psi = sigma^2
// lambda^2 / 2), rho(f) is characterized by a ground-state identity: the
// largest eigenvalue of
//     theta * fbar(x) + (sigma^2 / 2) * d^2/dx^2,   fbar(x) = sin(x)/x,
// equals 1 at theta = 1/rho(f). The operator is discretized as a Dirichlet
// tridiagonal matrix on [-x_halfwidth, x_halfwidth] and solved exactly.
struct FixedPointReport {
  double rho_f = 0.0;      // kernel-eigenvalue route
  double m_value = 0.0;    // ground-state value at theta = 1/rho_f
  double deviation = 0.0;  // |m_value - 1|
};
FixedPointReport indicator_fixed_point_check(const WalkModel& model,
                                             const FrequencyGrid& grid,
                                             double x_halfwidth = 18.0,
                                             int x_points = 2401);

}  // namespace addwalk
