#include "addwalk/walk_model.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace addwalk {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Terms summed literally before switching to the analytic tail.
constexpr std::int64_t kStableSeriesTerms = 1'000'000;

void check_dim(int d) {
  if (d < 1 || d > kMaxDim) {
    throw std::invalid_argument("dimension must be in 1..3");
  }
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

double zeta_series(double s) {
  if (!(s > 1.0)) throw std::domain_error("zeta requires s > 1");
  // Euler–Maclaurin with explicit head: error ~ N^{-s-7}.
  constexpr int N = 50;
  double head = 0.0;
  for (int k = N; k >= 1; --k) head += std::pow(double(k), -s);
  const double ns = std::pow(double(N), -s);
  double tail = double(N) * ns / (s - 1.0) - 0.5 * ns;
  double c = s / double(N);
  tail += ns * c / 12.0;
  c *= (s + 1.0) * (s + 2.0) / (double(N) * double(N));
  tail -= ns * c / 720.0;
  c *= (s + 3.0) * (s + 4.0) / (double(N) * double(N));
  tail += ns * c / 30240.0;
  return head + tail;
}

double stable_cosine_integral(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) {
    throw std::domain_error("stable index must lie in (0,2)");
  }
  return kPi / (2.0 * std::tgamma(1.0 + alpha) * std::sin(kPi * alpha / 2.0));
}

double stable_char_fn(double alpha, double lambda) {
  if (!(alpha > 0.0 && alpha < 2.0)) {
    throw std::domain_error("stable index must lie in (0,2)");
  }
  // The law lives on the integers, so the characteristic function has
  // period 2*pi and is even.
  double lam = std::abs(std::remainder(lambda, 2.0 * kPi));
  if (lam == 0.0) return 1.0;

  const double s = 1.0 + alpha;
  const double K = double(kStableSeriesTerms);

  // Head: sum_{k<=K} cos(lam k) k^{-s}. The angle advances by a planar
  // rotation, re-synchronized against libm periodically so the error stays
  // at the last-digit level over 10^6 steps.
  long double head = 0.0L;
  {
    const double cl = std::cos(lam), sl = std::sin(lam);
    double c = 1.0, sn = 0.0;  // cos(0), sin(0)
    for (std::int64_t k = 1; k <= kStableSeriesTerms; ++k) {
      if ((k & 4095) == 1) {
        c = std::cos(lam * double(k));
        sn = std::sin(lam * double(k));
      } else {
        const double cn = c * cl - sn * sl;
        sn = sn * cl + c * sl;
        c = cn;
      }
      head += (long double)(c * std::pow(double(k), -s));
    }
  }

  // Tail integral I = \int_K^inf x^{-s} cos(lam x) dx.
  const double y = lam * K;
  long double integral;
  if (y < 12.0) {
    // I = K^{-alpha}/alpha + lam^alpha * ( -C_alpha + sum_j (-1)^{j+1}
    //     y^{2j-alpha} / ((2j)! (2j-alpha)) ),  y = lam*K.
    long double series = 0.0L;
    long double num = 1.0L;  // y^{2j} / (2j)!
    const long double ly = y;
    for (int j = 1; j <= 60; ++j) {
      num *= ly * ly / ((long double)(2 * j - 1) * (long double)(2 * j));
      const long double term =
          num * std::pow((long double)y, (long double)-alpha) /
          ((long double)(2 * j) - (long double)alpha);
      series += (j % 2 == 1) ? term : -term;
      if (num < 1e-22L * (1.0L + std::abs((long double)series))) break;
    }
    integral = std::pow((long double)K, (long double)-alpha) / (long double)alpha +
               std::pow((long double)lam, (long double)alpha) *
                   (-(long double)stable_cosine_integral(alpha) + series);
  } else {
    // Repeated integration by parts; each step gains a factor ~ (s+j)/y.
    const double cK = std::cos(lam * K), sK = std::sin(lam * K);
    long double coeff = 1.0L;
    long double sum = 0.0L;
    double sigma = s;
    bool cos_phase = true;  // integrand currently x^{-sigma} cos(lam x)
    for (int j = 0; j < 6; ++j) {
      const long double pK = std::pow((long double)K, (long double)-sigma);
      if (cos_phase) {
        // int_K^inf x^{-sigma} cos = -K^{-sigma} sin(lam K)/lam
        //                            + (sigma/lam) int x^{-sigma-1} sin
        sum += coeff * (-(long double)sK) * pK / (long double)lam;
        coeff *= (long double)sigma / (long double)lam;
      } else {
        // int_K^inf x^{-sigma} sin =  K^{-sigma} cos(lam K)/lam
        //                            - (sigma/lam) int x^{-sigma-1} cos
        sum += coeff * (long double)cK * pK / (long double)lam;
        coeff *= -(long double)sigma / (long double)lam;
      }
      cos_phase = !cos_phase;
      sigma += 1.0;
    }
    integral = sum;
  }

  // Euler–Maclaurin end corrections for the K-th lattice point.
  const double cK = std::cos(lam * K), sK = std::sin(lam * K);
  const double pK = std::pow(K, -s);
  const double f0 = pK * cK;
  const double f1 = -s * pK / K * cK - lam * pK * sK;
  const double f3 = -s * (s + 1) * (s + 2) * pK / (K * K * K) * cK -
                    3.0 * s * (s + 1) * lam * pK / (K * K) * sK +
                    3.0 * s * lam * lam * pK / K * cK + lam * lam * lam * pK * sK;
  const long double tail =
      integral - (long double)f0 / 2.0L - (long double)f1 / 12.0L +
      (long double)f3 / 720.0L;

  return double((head + tail) / (long double)zeta_series(s));
}

double WalkModel::char_fn(const double* lambda) const {
  if (exact_steps) {
    double acc = 0.0;
    for (std::size_t i = 0; i < steps.offsets.size(); ++i) {
      double dot = 0.0;
      for (int k = 0; k < d; ++k) dot += lambda[k] * double(steps.offsets[i][k]);
      acc += double(steps.weights[i]) * std::cos(dot);
    }
    return acc / double(steps.den);
  }
  if (alpha == 2.0) {
    throw std::domain_error(
        "the analytic gaussian family carries no lattice step law");
  }
  return stable_char_fn(alpha, lambda[0]);
}

double WalkModel::psi(const double* lambda) const {
  if (alpha == 2.0) {
    double q = 0.0;
    for (int k = 0; k < d; ++k) q += gamma_diag[k] * lambda[k] * lambda[k];
    return 0.5 * q;
  }
  return std::pow(std::abs(lambda[0]), alpha);
}

double WalkModel::norming(double t) const {
  if (!(t > 0.0)) throw std::domain_error("norming requires t > 0");
  if (alpha == 2.0) return std::sqrt(t);
  return stable_scale * std::pow(t, 1.0 / alpha);
}

double WalkModel::det_gamma() const {
  if (alpha != 2.0) throw std::domain_error("covariance defined only for alpha = 2");
  double det = 1.0;
  for (int k = 0; k < d; ++k) det *= gamma_diag[k];
  return det;
}

void WalkModel::sample_step(RngStream& rng, std::int64_t* step) const {
  if (!exact_steps && alpha == 2.0) {
    throw std::domain_error(
        "the analytic gaussian family carries no lattice step law");
  }
  for (int k = 0; k < d; ++k) step[k] = 0;
  if (exact_steps) {
    std::int64_t r = std::int64_t(rng.next_below(std::uint64_t(steps.den)));
    for (std::size_t i = 0; i < steps.offsets.size(); ++i) {
      r -= steps.weights[i];
      if (r < 0) {
        for (int k = 0; k < d; ++k) step[k] = steps.offsets[i][k];
        return;
      }
    }
    step[0] = steps.offsets.back()[0];  // unreachable for a valid table
    return;
  }
  // Heavy-tailed magnitude: P(X = k) proportional to k^{-1-alpha}, k >= 1,
  // by rejection from the Pareto envelope (floor of U^{-1/alpha}).
  const double b = std::pow(2.0, alpha);
  for (;;) {
    const double u = rng.next_unit();
    const double v = rng.next_unit();
    const double x = std::floor(std::pow(1.0 - u, -1.0 / alpha));
    if (!(x >= 1.0) || x > 0x1p60) continue;  // resample astronomically rare overflow
    const double t = std::pow(1.0 + 1.0 / x, alpha);
    if (v * x * (t - 1.0) / (b - 1.0) <= t / b) {
      step[0] = rng.next_sign() * std::int64_t(x);
      return;
    }
  }
}

std::vector<std::int64_t> WalkModel::sample_path(std::int64_t n,
                                                 RngStream& rng) const {
  if (n < 0) throw std::invalid_argument("horizon must be nonnegative");
  std::vector<std::int64_t> pos(std::size_t(n + 1) * std::size_t(d), 0);
  std::int64_t step[kMaxDim];
  for (std::int64_t k = 1; k <= n; ++k) {
    sample_step(rng, step);
    for (int j = 0; j < d; ++j) {
      pos[std::size_t(k) * std::size_t(d) + std::size_t(j)] =
          pos[std::size_t(k - 1) * std::size_t(d) + std::size_t(j)] + step[j];
    }
  }
  return pos;
}

WalkModel lazy_simple_model(int d) {
  check_dim(d);
  WalkModel m;
  m.name = "lazy-simple";
  m.d = d;
  m.alpha = 2.0;
  m.cf_nonneg = true;  // phi = 1/2 + (1/2d) sum_i cos(lambda_i) >= 0
  m.exact_steps = true;
  m.steps.d = d;
  m.steps.den = 4 * d;
  m.steps.offsets.push_back({0, 0, 0});
  m.steps.weights.push_back(2 * d);
  for (int k = 0; k < d; ++k) {
    std::array<int, kMaxDim> plus{0, 0, 0}, minus{0, 0, 0};
    plus[k] = 1;
    minus[k] = -1;
    m.steps.offsets.push_back(plus);
    m.steps.weights.push_back(1);
    m.steps.offsets.push_back(minus);
    m.steps.weights.push_back(1);
  }
  for (int k = 0; k < d; ++k) m.gamma_diag[k] = 1.0 / (2.0 * d);
  return m;
}

WalkModel simple_model(int d) {
  check_dim(d);
  WalkModel m;
  m.name = "simple";
  m.d = d;
  m.alpha = 2.0;
  m.cf_nonneg = false;  // phi((pi,...,pi)) = -1
  m.exact_steps = true;
  m.steps.d = d;
  m.steps.den = 2 * d;
  for (int k = 0; k < d; ++k) {
    std::array<int, kMaxDim> plus{0, 0, 0}, minus{0, 0, 0};
    plus[k] = 1;
    minus[k] = -1;
    m.steps.offsets.push_back(plus);
    m.steps.weights.push_back(1);
    m.steps.offsets.push_back(minus);
    m.steps.weights.push_back(1);
  }
  for (int k = 0; k < d; ++k) m.gamma_diag[k] = 1.0 / double(d);
  return m;
}

WalkModel stable_model(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) {
    throw std::invalid_argument("stable index must lie in (0,2)");
  }
  WalkModel m;
  m.name = "stable:" + short_number(alpha);
  m.d = 1;
  m.alpha = alpha;
  m.cf_nonneg = false;
  m.exact_steps = false;
  // a(n) = c n^{1/alpha} with c chosen so n (1 - phi(lambda/a(n))) -> |lambda|^alpha.
  m.stable_scale =
      std::pow(stable_cosine_integral(alpha) / zeta_series(1.0 + alpha),
               1.0 / alpha);
  return m;
}

WalkModel gaussian_model(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  WalkModel m;
  m.name = "gaussian:" + short_number(sigma);
  m.d = 1;
  m.alpha = 2.0;
  m.cf_nonneg = true;
  m.exact_steps = false;
  m.gamma_diag[0] = sigma * sigma;
  return m;
}

WalkModel build_model(const std::string& kind, int d) {
  if (kind == "lazy-simple") return lazy_simple_model(d);
  if (kind == "simple") return simple_model(d);
  const std::string stable_prefix = "stable:";
  if (kind.rfind(stable_prefix, 0) == 0) {
    if (d != 1) throw std::invalid_argument("stable models support d = 1 only");
    const double alpha = std::stod(kind.substr(stable_prefix.size()));
    return stable_model(alpha);
  }
  const std::string gaussian_prefix = "gaussian";
  if (kind.rfind(gaussian_prefix, 0) == 0) {
    if (d != 1) {
      throw std::invalid_argument("the gaussian family supports d = 1 only");
    }
    double sigma = 1.0;
    if (kind.size() > gaussian_prefix.size()) {
      if (kind[gaussian_prefix.size()] != ':') {
        throw std::invalid_argument("unknown model kind: " + kind);
      }
      sigma = std::stod(kind.substr(gaussian_prefix.size() + 1));
    }
    return gaussian_model(sigma);
  }
  throw std::invalid_argument("unknown model kind: " + kind);
}

void require_subcritical(const WalkModel& model, int p) {
  if (p < 1) throw std::invalid_argument("p must be a positive integer");
  if (!(double(model.d) < model.alpha * double(p))) {
    throw std::invalid_argument(
        "parameters violate the subcriticality condition d < alpha*p");
  }
}

}  // namespace addwalk
