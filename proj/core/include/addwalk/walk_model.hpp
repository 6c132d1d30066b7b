// Symmetric lattice step laws and their analytic companions.
//
// Three families are built in:
//   lazy-simple : hold with probability 1/2, else one of the 2d unit steps
//                 (probability 1/(4d) each). Its step characteristic function
//                 is nonnegative everywhere, the hypothesis under which the
//                 moment-inequality suite applies to walks.
//   simple      : one of the 2d unit steps with probability 1/(2d) each.
//   stable:a    : d = 1 heavy-tailed law P(S=±k) ∝ k^(-1-a), k >= 1, in the
//                 domain of attraction of the symmetric a-stable law.
//
// Each model carries: the exact dyadic step table where one exists, the step
// characteristic function phi, the limit exponent Psi, the stable index
// alpha, the norming a(t) with a(n)^(-1) S(n) converging to the limit law,
// and the one-step covariance for the square-integrable families.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "addwalk/rng.hpp"

namespace addwalk {

inline constexpr int kMaxDim = 3;

// Finite step law with exactly representable probabilities:
// P(offsets[i]) = weights[i] / den.
struct StepLaw {
  int d = 1;
  std::int64_t den = 1;
  std::vector<std::array<int, kMaxDim>> offsets;  // coordinates beyond d are 0
  std::vector<std::int64_t> weights;
};

class WalkModel {
 public:
  std::string name;        // "lazy-simple", "simple", "stable:<alpha>"
  int d = 1;
  double alpha = 2.0;      // stable index in (0, 2]
  bool cf_nonneg = false;  // phi(lambda) >= 0 for all lambda
  bool exact_steps = true; // step law finite with dyadic probabilities
  StepLaw steps;           // populated iff exact_steps
  std::array<double, kMaxDim> gamma_diag{};  // step covariance diag (alpha==2)
  double stable_scale = 0.0;  // c in a(t) = c t^{1/alpha} for stable models

  // Step characteristic function phi(lambda) = E cos(lambda . S(1)).
  double char_fn(const double* lambda) const;
  double char_fn1(double lambda) const { return char_fn(&lambda); }

  // Limit exponent Psi of the attracting stable law:
  // quadratic form lambda.(Gamma lambda)/2 when alpha = 2, |lambda|^alpha
  // for the heavy-tailed family.
  double psi(const double* lambda) const;
  double psi1(double lambda) const { return psi(&lambda); }

  // Norming a(t): sqrt(t) when alpha = 2, c t^{1/alpha} otherwise.
  double norming(double t) const;

  double det_gamma() const;

  // Draws one step into step[0..d); coordinates are exact lattice moves.
  void sample_step(RngStream& rng, std::int64_t* step) const;

  // Positions S(0..n), S(0) = 0, as a flat row-major (n+1) x d array.
  std::vector<std::int64_t> sample_path(std::int64_t n, RngStream& rng) const;
};

// Factories. `build_model` accepts the CLI spelling
// {lazy-simple, simple, stable:<alpha>, gaussian:<sigma>}.
WalkModel lazy_simple_model(int d);
WalkModel simple_model(int d);
WalkModel stable_model(double alpha);
// Analytic family with exponent sigma^2 lambda^2 / 2 (d = 1): carries no
// lattice step law, so it cannot be sampled; it exists for the variational
// solver and the covariance-scaling checks.
WalkModel gaussian_model(double sigma);
WalkModel build_model(const std::string& kind, int d);

// Riemann zeta on s > 1 (Euler–Maclaurin; absolute accuracy ~1e-14).
double zeta_series(double s);

// Tail-sum constant of the symmetric stable limit:
// integral of (1 - cos u) u^{-1-alpha} over (0, inf).
double stable_cosine_integral(double alpha);

// Characteristic function of the heavy-tailed step law,
// sum_{k>=1} cos(lambda k) k^{-1-alpha} / zeta(1+alpha), to ~1e-12 absolute.
double stable_char_fn(double alpha, double lambda);

// Guard for experiment constructors: the local-time regime of interest
// requires d < alpha * p.
void require_subcritical(const WalkModel& model, int p);

}  // namespace addwalk
