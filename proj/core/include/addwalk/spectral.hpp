// Quadrature oracle for local-time moments.
//
// The first two moments of l(n,0) admit closed Fourier forms over
// [-pi,pi]^d. With a periodic trapezoid rule the integrands - trigonometric
// polynomials for finite step laws - are integrated EXACTLY once the node
// count exceeds the polynomial degree, which makes this module a
// simulation-independent reference for the samplers and the enumeration
// oracle alike.
//
//   E l(n,0)   = (2pi)^{-d}  int D_n(lambda)^p dlambda,
//                D_n = sum_{k=0}^n phi^k,
//   E l(n,0)^2 = (2pi)^{-2d} int int J(l1,l2)^p dl1 dl2,
//                J = sum_{k<=k'} phi(l1+l2)^k phi(l2)^{k'-k}
//                  + sum_{k'<k}  phi(l1+l2)^{k'} phi(l1)^{k-k'},
// where the inner sums follow from splitting on the time order and using
// independent increments.
#pragma once

#include <cstdint>

#include "addwalk/walk_model.hpp"

namespace addwalk {

struct QuadratureSpec {
  int points = 64;  // nodes per dimension; forced even, >= 16

  // Smallest even node count that integrates a degree-`deg` trigonometric
  // polynomial exactly.
  static QuadratureSpec exact_for_degree(std::int64_t deg) {
    std::int64_t k = deg + 1;
    if (k < 16) k = 16;
    if (k % 2 != 0) ++k;
    return QuadratureSpec{int(k)};
  }
};

double mean_local_time(const WalkModel& model, std::int64_t n, int p,
                       const QuadratureSpec& quad);

double second_moment_local_time(const WalkModel& model, std::int64_t n, int p,
                                const QuadratureSpec& quad);

// Normalization a(n)^d / n^p of the distributional limit of l(n,0).
double weak_limit_scaling(const WalkModel& model, int p, std::int64_t n);

// Stable geometric sum D_n(phi) = sum_{k=0}^{n} phi^k for phi in [-1, 1].
double geometric_sum(double phi, std::int64_t n);

}  // namespace addwalk
