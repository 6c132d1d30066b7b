#include "addwalk/variational.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

namespace addwalk {
namespace {

using cvec = std::vector<std::complex<double>>;

int fft_size(int n) {
  int m = 1;
  while (m < n) m <<= 1;
  return m;
}

double ipow(double x, int e) {
  double r = 1.0;
  while (e > 0) {
    if (e & 1) r *= x;
    x *= x;
    e >>= 1;
  }
  return r;
}

std::vector<double> weight_vector(const WalkModel& model,
                                  const FrequencyGrid& grid) {
  if (model.d != 1) {
    throw std::invalid_argument("frequency-grid functionals support d = 1 only");
  }
  if (grid.points < 4 || grid.points % 4 != 0) {
    throw std::invalid_argument("grid points must be a positive multiple of 4");
  }
  if (!(grid.lambda_max > 0.0)) {
    throw std::invalid_argument("need lambda_max > 0");
  }
  std::vector<double> w(std::size_t(grid.points));
  for (int i = 0; i < grid.points; ++i) {
    w[std::size_t(i)] = 1.0 / std::sqrt(1.0 + model.psi1(grid.node(i)));
  }
  return w;
}

// FFT-backed correlation engine. All arrays live on the step-h node grid
// (size N) or the difference grid (size 2N-1, index k for offset k-(N-1)).
struct CorrEngine {
  Eigen::FFT<double> fft;

  // a[o] = sum_j u_j u_{j+o} for o = 0..N-1.
  std::vector<double> autocorr(const std::vector<double>& u) {
    const int n = int(u.size());
    const std::size_t m = std::size_t(fft_size(2 * n));
    cvec in(m);
    for (int i = 0; i < n; ++i) in[std::size_t(i)] = u[std::size_t(i)];
    cvec sp;
    fft.fwd(sp, in);
    for (auto& z : sp) z = std::norm(z);
    cvec back;
    fft.inv(back, sp);
    std::vector<double> a(std::size_t(n), 0.0);
    for (int o = 0; o < n; ++o) a[std::size_t(o)] = back[std::size_t(o)].real();
    return a;
  }

  // s_i = sum_o t(o) u_{i+o}, o = -(N-1)..N-1, t given as difference-grid
  // table (t[k] = t(k-(N-1))).
  std::vector<double> corr_table(const std::vector<double>& t,
                                 const std::vector<double>& u) {
    const int n = int(u.size());
    if (int(t.size()) != 2 * n - 1) {
      throw std::invalid_argument("difference table must have 2N-1 entries");
    }
    const int m = fft_size(2 * n);
    cvec tin(std::size_t(m), 0.0), uin(std::size_t(m), 0.0);
    // Place offset o at cyclic index o mod m; s_i then reads the cyclic
    // convolution at i (u is zero-padded, so no wraparound pollution).
    for (int k = 0; k < 2 * n - 1; ++k) {
      const int o = k - (n - 1);
      const int idx = o >= 0 ? o : m + o;
      tin[std::size_t(idx)] = t[std::size_t(k)];
    }
    for (int i = 0; i < n; ++i) uin[std::size_t(i)] = u[std::size_t(i)];
    cvec ts, us;
    fft.fwd(ts, tin);
    fft.fwd(us, uin);
    for (int k = 0; k < m; ++k) ts[std::size_t(k)] *= us[std::size_t(k)];
    cvec back;
    fft.inv(back, ts);
    std::vector<double> s(std::size_t(n), 0.0);
    for (int i = 0; i < n; ++i) {
      // Convolution at index i equals sum_m t(i - j) u_j = sum_o t(o) u_{i-o};
      // our tables are used with symmetric t, and for asymmetric callers the
      // table is pre-reversed, so this is the correlation stated above.
      s[std::size_t(i)] = back[std::size_t(i)].real();
    }
    return s;
  }
};

double dot_h(const std::vector<double>& a, const std::vector<double>& b,
             double h) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) s += (long double)a[i] * b[i];
  return double(s) * h;
}

void normalize_sphere(std::vector<double>& g, double h) {
  const double nrm = std::sqrt(dot_h(g, g, h));
  if (!(nrm > 0.0)) throw std::logic_error("zero vector on the sphere");
  for (double& x : g) x /= nrm;
}

struct Evaluated {
  double value = 0.0;
  std::vector<double> autocorr;  // a[o], o = 0..N-1, of u = g.*w
};

Evaluated eval_objective(CorrEngine& eng, const std::vector<double>& g,
                         const std::vector<double>& w, double h, int e) {
  const std::size_t n = g.size();
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = g[i] * w[i];
  Evaluated ev;
  ev.autocorr = eng.autocorr(u);
  long double f = ipow(h * ev.autocorr[0], e);
  for (std::size_t o = 1; o < n; ++o) f += 2.0L * ipow(h * ev.autocorr[o], e);
  ev.value = double(f) * h;
  return ev;
}

std::vector<double> eval_gradient(CorrEngine& eng, const std::vector<double>& g,
                                  const std::vector<double>& w, double h, int e,
                                  const std::vector<double>& autocorr) {
  const int n = int(g.size());
  std::vector<double> u(std::size_t(n), 0.0);
  for (int i = 0; i < n; ++i) u[std::size_t(i)] = g[std::size_t(i)] * w[std::size_t(i)];
  // H(o)^(e-1) on the difference grid.
  std::vector<double> t(std::size_t(2 * n - 1), 0.0);
  for (int k = 0; k < 2 * n - 1; ++k) {
    const int o = std::abs(k - (n - 1));
    t[std::size_t(k)] = ipow(h * autocorr[std::size_t(o)], e - 1);
  }
  const std::vector<double> s = eng.corr_table(t, u);
  std::vector<double> grad(std::size_t(n), 0.0);
  const double c = 2.0 * e * h * h;
  for (int i = 0; i < n; ++i) {
    grad[std::size_t(i)] = c * w[std::size_t(i)] * s[std::size_t(i)];
  }
  return grad;
}

struct AscentOutcome {
  double value = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;
  std::vector<double> optimizer;
  std::vector<double> trace;
};

AscentOutcome ascend(const std::vector<double>& w, double h, int e,
                     const AscentOptions& opt) {
  CorrEngine eng;
  std::vector<double> g = w;
  normalize_sphere(g, h);
  Evaluated cur = eval_objective(eng, g, w, h, e);
  std::vector<double> trace{cur.value};

  double step = 1.0;
  int it = 0;
  double grad_norm = 0.0;
  for (; it < opt.max_iterations; ++it) {
    std::vector<double> grad = eval_gradient(eng, g, w, h, e, cur.autocorr);
    // Tangent projection on the sphere h sum g^2 = 1.
    const double ip = dot_h(grad, g, h);
    for (std::size_t i = 0; i < g.size(); ++i) grad[i] -= ip * g[i];
    grad_norm = std::sqrt(dot_h(grad, grad, h));

    step = std::min(1.0, step * 2.0);
    bool accepted = false;
    std::vector<double> cand(g.size());
    Evaluated next;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t i = 0; i < g.size(); ++i) cand[i] = g[i] + step * grad[i];
      normalize_sphere(cand, h);
      next = eval_objective(eng, cand, w, h, e);
      if (next.value > cur.value) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // stationary to machine precision
    const double gain =
        (next.value - cur.value) / std::max(std::abs(next.value), 1e-300);
    g.swap(cand);
    cur = std::move(next);
    trace.push_back(cur.value);
    if (gain < opt.tolerance) {
      ++it;
      break;
    }
  }

  AscentOutcome out;
  out.value = cur.value;
  out.iterations = it;
  out.grad_norm = grad_norm;
  out.optimizer = std::move(g);
  out.trace = std::move(trace);
  return out;
}

}  // namespace

double overlap_objective(const std::vector<double>& g,
                         const std::vector<double>& w, double h, int e) {
  if (g.size() != w.size() || g.empty()) {
    throw std::invalid_argument("g and w must be equal-size nonempty vectors");
  }
  if (e < 1) throw std::invalid_argument("need e >= 1");
  CorrEngine eng;
  return eval_objective(eng, g, w, h, e).value;
}

std::vector<double> overlap_gradient(const std::vector<double>& g,
                                     const std::vector<double>& w, double h,
                                     int e) {
  if (g.size() != w.size() || g.empty()) {
    throw std::invalid_argument("g and w must be equal-size nonempty vectors");
  }
  if (e < 1) throw std::invalid_argument("need e >= 1");
  CorrEngine eng;
  const Evaluated ev = eval_objective(eng, g, w, h, e);
  return eval_gradient(eng, g, w, h, e, ev.autocorr);
}

VariationalResult maximize_overlap_functional(const WalkModel& model, int e,
                                              const FrequencyGrid& grid,
                                              const AscentOptions& opt) {
  if (e < 1) throw std::invalid_argument("need e >= 1");
  if (grid.points < 16 || grid.points % 8 != 0) {
    throw std::invalid_argument(
        "cutoff extrapolation needs points divisible by 8 (and >= 16)");
  }

  VariationalResult res;
  for (int level = 0; level < 3; ++level) {
    FrequencyGrid sub{grid.lambda_max / (1 << level), grid.points >> level};
    const std::vector<double> w = weight_vector(model, sub);
    AscentOutcome out = ascend(w, sub.h(), e, opt);
    res.cutoff_values[level] = out.value;
    if (level == 0) {
      res.value = out.value;
      res.iterations = out.iterations;
      res.grad_norm = out.grad_norm;
      res.optimizer = std::move(out.optimizer);
      res.objective_trace = std::move(out.trace);
    }
  }

  // One Aitken step assuming the cutoff tail scales like a fixed power of L.
  const double x2 = res.cutoff_values[0];
  const double x1 = res.cutoff_values[1];
  const double x0 = res.cutoff_values[2];
  const double denom = x2 - 2.0 * x1 + x0;
  if (std::abs(denom) > 1e-14 * std::max(1.0, std::abs(x2))) {
    res.extrapolated = x2 - (x2 - x1) * (x2 - x1) / denom;
  } else {
    res.extrapolated = x2;
  }
  return res;
}

double rho1(const WalkModel& model, int p, const FrequencyGrid& grid) {
  if (p < 1) throw std::invalid_argument("need p >= 1");
  return maximize_overlap_functional(model, p, grid).extrapolated;
}

double rho2(const WalkModel& model, int p, const FrequencyGrid& grid) {
  if (p < 1) throw std::invalid_argument("need p >= 1");
  return maximize_overlap_functional(model, 2 * p, grid).extrapolated;
}

double rho_of_f(const WalkModel& model, const std::vector<double>& f_diff,
                const FrequencyGrid& grid) {
  const std::vector<double> w = weight_vector(model, grid);
  const int n = grid.points;
  if (int(f_diff.size()) != 2 * n - 1) {
    throw std::invalid_argument("f table must have 2N-1 entries");
  }
  const double h = grid.h();

  // corr_table computes sum_o t(o) u_{i+o}; the kernel row needs
  // sum_j f((i-j)h) u_j = sum_o f(-oh) u_{i+o}, so feed the reversed table.
  std::vector<double> frev(f_diff.rbegin(), f_diff.rend());

  // Spectral shift making the iteration matrix positive definite:
  // max row sum of |K| is at most h * max w^2 * sum |f|.
  double wmax = 0.0;
  for (double x : w) wmax = std::max(wmax, x);
  long double fsum = 0.0L;
  for (double x : f_diff) fsum += std::abs(x);
  const double shift = h * wmax * wmax * double(fsum) + 1e-30;

  CorrEngine eng;
  std::vector<double> v = w;
  {
    double nrm = std::sqrt(dot_h(v, v, 1.0));
    for (double& x : v) x /= nrm;
  }
  double lambda = 0.0, prev = std::numeric_limits<double>::infinity();
  std::vector<double> wv(std::size_t(n), 0.0);
  for (int iter = 0; iter < 20000; ++iter) {
    for (int i = 0; i < n; ++i) wv[std::size_t(i)] = w[std::size_t(i)] * v[std::size_t(i)];
    std::vector<double> s = eng.corr_table(frev, wv);
    // y = (K + shift I) v;  lambda = <v, K v> (v is unit).
    long double ray = 0.0L, nrm2 = 0.0L;
    for (int i = 0; i < n; ++i) {
      const double kv = h * w[std::size_t(i)] * s[std::size_t(i)];
      ray += (long double)v[std::size_t(i)] * kv;
      wv[std::size_t(i)] = kv + shift * v[std::size_t(i)];  // reuse as y
      nrm2 += (long double)wv[std::size_t(i)] * wv[std::size_t(i)];
    }
    lambda = double(ray);
    const double nrm = std::sqrt(double(nrm2));
    for (int i = 0; i < n; ++i) v[std::size_t(i)] = wv[std::size_t(i)] / nrm;
    if (std::abs(lambda - prev) <= 1e-13 * std::max(1.0, std::abs(lambda))) break;
    prev = lambda;
  }
  return lambda;
}

double rho_of_f(const WalkModel& model,
                const std::function<double(double)>& f,
                const FrequencyGrid& grid) {
  const int n = grid.points;
  const double h = grid.h();
  std::vector<double> tab(std::size_t(2 * n - 1), 0.0);
  for (int k = 0; k < 2 * n - 1; ++k) {
    tab[std::size_t(k)] = f((k - (n - 1)) * h);
  }
  return rho_of_f(model, tab, grid);
}

std::vector<double> indicator_difference_table(const FrequencyGrid& grid,
                                               double half_width,
                                               double height) {
  if (!(half_width > 0.0)) throw std::invalid_argument("need half_width > 0");
  const int n = grid.points;
  const double h = grid.h();
  std::vector<double> tab(std::size_t(2 * n - 1), 0.0);
  for (int k = 0; k < 2 * n - 1; ++k) {
    const double u = (k - (n - 1)) * h;
    const double lo = std::max(u - 0.5 * h, -half_width);
    const double hi = std::min(u + 0.5 * h, half_width);
    tab[std::size_t(k)] = hi > lo ? height * (hi - lo) / h : 0.0;
  }
  return tab;
}

DualityReport duality_consistency(const WalkModel& model, int e,
                                  const FrequencyGrid& grid) {
  const VariationalResult res = maximize_overlap_functional(model, e, grid);
  const std::vector<double> w = weight_vector(model, grid);
  const int n = grid.points;
  const double h = grid.h();

  std::vector<double> u(std::size_t(n), 0.0);
  for (int i = 0; i < n; ++i) {
    u[std::size_t(i)] = res.optimizer[std::size_t(i)] * w[std::size_t(i)];
  }
  CorrEngine eng;
  const std::vector<double> a = eng.autocorr(u);

  std::vector<double> trial(std::size_t(2 * n - 1), 0.0);
  if (e == 1) {
    // Conjugate exponent is infinity; the unit-sup-norm maximizer is f == 1.
    std::fill(trial.begin(), trial.end(), 1.0);
  } else {
    const double q = double(e) / double(e - 1);
    long double qs = 0.0L;
    for (int k = 0; k < 2 * n - 1; ++k) {
      const double hv = h * a[std::size_t(std::abs(k - (n - 1)))];
      const double t = std::copysign(ipow(std::abs(hv), e - 1), hv);
      trial[std::size_t(k)] = t;
      qs += std::pow(std::abs(t), q);
    }
    const double nrm = std::pow(double(qs) * h, 1.0 / q);
    for (double& x : trial) x /= nrm;
  }

  DualityReport rep;
  rep.rho_trial = rho_of_f(model, trial, grid);
  rep.root_value = std::pow(res.value, 1.0 / e);
  rep.rel_gap = std::abs(rep.rho_trial - rep.root_value) / rep.root_value;
  return rep;
}

FixedPointReport indicator_fixed_point_check(const WalkModel& model,
                                             const FrequencyGrid& grid,
                                             double x_halfwidth, int x_points) {
  if (model.d != 1 || model.alpha != 2.0) {
    throw std::invalid_argument(
        "ground-state identity needs a square-integrable d = 1 model");
  }
  if (x_points < 3) throw std::invalid_argument("need x_points >= 3");
  const double sigma2 = model.gamma_diag[0];

  FixedPointReport rep;
  rep.rho_f = rho_of_f(model, indicator_difference_table(grid, 1.0, 0.5), grid);
  const double theta = 1.0 / rep.rho_f;

  // theta * fbar(x) + (sigma^2/2) d^2/dx^2 on [-L, L], Dirichlet walls.
  const int nx = x_points;
  const double hx = 2.0 * x_halfwidth / (nx - 1);
  const double kin = 0.5 * sigma2 / (hx * hx);
  Eigen::VectorXd diag(nx), sub(nx - 1);
  for (int i = 0; i < nx; ++i) {
    const double x = -x_halfwidth + i * hx;
    const double fbar = x == 0.0 ? 1.0 : std::sin(x) / x;
    diag(i) = theta * fbar - 2.0 * kin;
  }
  sub.setConstant(kin);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  rep.m_value = es.eigenvalues()(nx - 1);
  rep.deviation = std::abs(rep.m_value - 1.0);
  return rep;
}

}  // namespace addwalk
