#include "addwalk/spectral.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "addwalk/parallel.hpp"

namespace addwalk {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

int checked_points(const QuadratureSpec& quad) {
  int k = quad.points;
  if (k < 16) throw std::invalid_argument("quadrature needs at least 16 points");
  if (k % 2 != 0) throw std::invalid_argument("quadrature points must be even");
  return k;
}

// phi at every 1-d node lambda_i = -pi + 2 pi i / K. Sums of two nodes wrap
// onto the node set: index (i + j + K/2) mod K.
std::vector<double> phi_table_1d(const WalkModel& model, int K) {
  std::vector<double> t(static_cast<std::size_t>(K), 0.0);
  for (int i = 0; i < K; ++i) {
    const double lambda = -kPi + 2.0 * kPi * double(i) / double(K);
    t[std::size_t(i)] = model.char_fn1(lambda);
  }
  return t;
}

double ipow_double(double x, std::int64_t e) {
  double r = 1.0;
  while (e > 0) {
    if (e & 1) r *= x;
    x *= x;
    e >>= 1;
  }
  return r;
}

}  // namespace

double geometric_sum(double phi, std::int64_t n) {
  if (phi == 1.0) return double(n + 1);
  if (phi > 0.5) {
    // 1 - phi^{n+1} via expm1 to survive phi -> 1 cancellation.
    return -std::expm1(double(n + 1) * std::log(phi)) / (1.0 - phi);
  }
  return (1.0 - ipow_double(phi, n + 1)) / (1.0 - phi);
}

double mean_local_time(const WalkModel& model, std::int64_t n, int p,
                       const QuadratureSpec& quad) {
  if (n < 0 || p < 1) throw std::invalid_argument("need n >= 0 and p >= 1");
  const int K = checked_points(quad);
  const int d = model.d;

  std::size_t total = 1;
  for (int k = 0; k < d; ++k) total *= std::size_t(K);

  const std::vector<double> phi1 = (d == 1) ? phi_table_1d(model, K)
                                            : std::vector<double>();

  std::vector<double> vals(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    double phi;
    if (d == 1) {
      phi = phi1[idx];
    } else {
      double lambda[kMaxDim];
      std::size_t r = idx;
      for (int k = 0; k < d; ++k) {
        lambda[k] = -kPi + 2.0 * kPi * double(r % std::size_t(K)) / double(K);
        r /= std::size_t(K);
      }
      phi = model.char_fn(lambda);
    }
    vals[idx] = ipow_double(geometric_sum(phi, n), p);
  }
  // (2pi)^{-d} * (2pi/K)^d * sum = K^{-d} * sum.
  return pairwise_sum(vals) / double(total);
}

double second_moment_local_time(const WalkModel& model, std::int64_t n, int p,
                                const QuadratureSpec& quad) {
  if (n < 0 || p < 1) throw std::invalid_argument("need n >= 0 and p >= 1");
  const int K = checked_points(quad);
  const int d = model.d;
  if (d > 2) {
    throw std::invalid_argument(
        "second-moment quadrature supports d <= 2 (cost grows as K^{2d})");
  }

  const std::size_t per_dim = std::size_t(K);
  std::size_t nodes = 1;  // nodes of one d-dim grid
  for (int k = 0; k < d; ++k) nodes *= per_dim;

  // Tables of phi on the d-dim grid; the sum lambda1+lambda2 wraps onto the
  // same grid coordinatewise with index (i + j + K/2) mod K.
  std::vector<double> phi_grid(nodes);
  for (std::size_t idx = 0; idx < nodes; ++idx) {
    double lambda[kMaxDim];
    std::size_t r = idx;
    for (int k = 0; k < d; ++k) {
      lambda[k] = -kPi + 2.0 * kPi * double(r % per_dim) / double(K);
      r /= per_dim;
    }
    phi_grid[idx] = model.char_fn(lambda);
  }

  auto wrap_index = [&](std::size_t i, std::size_t j) {
    // componentwise (i_k + j_k + K/2) mod K
    std::size_t out = 0, mul = 1;
    for (int k = 0; k < d; ++k) {
      const std::size_t ik = i % per_dim, jk = j % per_dim;
      i /= per_dim;
      j /= per_dim;
      out += mul * ((ik + jk + per_dim / 2) % per_dim);
      mul *= per_dim;
    }
    return out;
  };

  // J(l1,l2) = sum_{k=0}^{n} A^k T_B[n-k]  +  sum_{k=0}^{n} A^k (T_C[n-k]-1),
  // where A = phi(l1+l2), B = phi(l2), C = phi(l1), T_X[m] = sum_{j<=m} X^j.
  // Partial geometric sums are tabulated once per node.
  const std::size_t stride = std::size_t(n + 1);
  std::vector<double> partial(nodes * stride);
  for (std::size_t idx = 0; idx < nodes; ++idx) {
    const double x = phi_grid[idx];
    double pw = 1.0, acc = 1.0;
    partial[idx * stride] = 1.0;
    for (std::int64_t m = 1; m <= n; ++m) {
      pw *= x;
      acc += pw;
      partial[idx * stride + std::size_t(m)] = acc;
    }
  }

  std::vector<double> vals(nodes * nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double* tC = &partial[i * stride];
    for (std::size_t j = 0; j < nodes; ++j) {
      const double A = phi_grid[wrap_index(i, j)];
      const double* tB = &partial[j * stride];
      double j1 = 0.0, j2 = 0.0, powA = 1.0;
      for (std::int64_t k = 0; k <= n; ++k) {
        j1 += powA * tB[n - k];
        j2 += powA * (tC[n - k] - 1.0);
        powA *= A;
      }
      vals[i * nodes + j] = ipow_double(j1 + j2, p);
    }
  }
  const double cell = 1.0 / double(nodes);  // (2pi)^{-d} (2pi/K)^d per grid
  return pairwise_sum(vals) * cell * cell;
}

double weak_limit_scaling(const WalkModel& model, int p, std::int64_t n) {
  require_subcritical(model, p);
  if (n < 1) throw std::invalid_argument("need n >= 1");
  return std::pow(model.norming(double(n)), model.d) /
         std::pow(double(n), double(p));
}

}  // namespace addwalk
