#pragma once
// Reference computations written independently of the library: plain loops,
// Gauss-Jordan inversion and composite Simpson quadrature. Nothing here calls
// into cpnopt, so a shared bug cannot hide in both sides of a comparison.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace oracle {

struct TwoMoments {
  double mean;
  double variance;
};

inline TwoMoments discrete_moments(const std::vector<double>& c, const std::vector<double>& p) {
  double total = 0.0;
  for (double v : p) total += v;
  long double mean = 0.0L;
  for (std::size_t k = 0; k < c.size(); ++k) mean += static_cast<long double>(c[k]) * (p[k] / total);
  long double var = 0.0L;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const long double d = c[k] - mean;
    var += d * d * (p[k] / total);
  }
  return {static_cast<double>(mean), static_cast<double>(var)};
}

inline double discrete_ei(const std::vector<double>& c, const std::vector<double>& p, double f_star) {
  double total = 0.0;
  for (double v : p) total += v;
  long double s = 0.0L;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (c[k] > f_star) s += static_cast<long double>(c[k] - f_star) * (p[k] / total);
  }
  return static_cast<double>(s);
}

inline double mass_at_or_above(const std::vector<double>& c, const std::vector<double>& p, double t) {
  double total = 0.0, above = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    total += p[k];
    if (c[k] >= t) above += p[k];
  }
  return above / total;
}

template <typename F>
double simpson(F f, double a, double b, int intervals) {
  if (intervals % 2) ++intervals;
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// E[max(0, Y - f_star)] for Y ~ N(mu, sigma^2), by quadrature over the improving half-line.
inline double gaussian_ei_quadrature(double mu, double sigma, double f_star) {
  const double lo = std::max(f_star, mu - 12.0 * sigma);
  const double hi = mu + 12.0 * sigma;
  if (hi <= lo) return 0.0;
  auto integrand = [&](double y) {
    const double z = (y - mu) / sigma;
    return (y - f_star) * std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
  };
  return simpson(integrand, lo, hi, 200000);
}

using Matrix = std::vector<std::vector<double>>;

using LongMatrix = std::vector<std::vector<long double>>;

// Gauss-Jordan with partial pivoting.
template <class M>
M invert(M a) {
  using T = typename M::value_type::value_type;
  const std::size_t n = a.size();
  M inv(n, std::vector<T>(n, T(0)));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (a[pivot][col] == 0.0) throw std::runtime_error("singular");
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    const T d = a[col][col];
    for (std::size_t j = 0; j < n; ++j) {
      a[col][j] /= d;
      inv[col][j] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const T f = a[r][col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

enum class Kernel { rbf, matern52, linear };

struct KernelParams {
  Kernel kind;
  double lengthscale;
  double signal_variance;
  double noise_variance;
};

// Linear kernel on inputs centred by the context mean, plus a 1e-6 bias.
inline long double kernel(const KernelParams& k, const std::vector<double>& a, const std::vector<double>& b,
                          const std::vector<long double>& center) {
  if (k.kind == Kernel::linear) {
    long double dot = 0.0L;
    for (std::size_t j = 0; j < a.size(); ++j) dot += (a[j] - center[j]) * (b[j] - center[j]);
    return k.signal_variance * dot + 1e-6L;
  }
  long double r2 = 0.0L;
  for (std::size_t j = 0; j < a.size(); ++j) r2 += (long double)(a[j] - b[j]) * (a[j] - b[j]);
  const long double ell = k.lengthscale;
  if (k.kind == Kernel::rbf) return k.signal_variance * std::exp(-r2 / (2.0L * ell * ell));
  const long double r = std::sqrt(r2) / ell;
  const long double s5 = std::sqrt(5.0L);
  return k.signal_variance * (1.0L + s5 * r + 5.0L * r * r / 3.0L) * std::exp(-s5 * r);
}

struct GaussianPrediction {
  double mean;
  double std;
  double variance;
};

// Textbook GP posterior with an explicit inverse, outputs standardized by the
// population mean and std of the context.
inline std::vector<GaussianPrediction> gp_dense(const KernelParams& k, const Matrix& x, const std::vector<double>& y,
                                                const Matrix& queries) {
  const std::size_t n = x.size();
  const std::size_t d = x.front().size();
  long double mean = 0.0L;
  for (double v : y) mean += v;
  mean /= static_cast<long double>(n);
  long double var = 0.0L;
  for (double v : y) var += (v - mean) * (v - mean);
  long double sd = std::sqrt(var / static_cast<long double>(n));
  // constant outputs: keep the unit scale
  if (!(sd > 1e-12L * std::max(1.0L, std::abs(mean)))) sd = 1.0L;
  std::vector<long double> center(d, 0.0L);
  if (k.kind == Kernel::linear) {
    for (const auto& row : x) {
      for (std::size_t j = 0; j < d; ++j) center[j] += row[j] / static_cast<long double>(n);
    }
  }
  LongMatrix kxx(n, std::vector<long double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) kxx[i][j] = kernel(k, x[i], x[j], center) + (i == j ? k.noise_variance : 0.0);
  }
  const LongMatrix kinv = invert(kxx);
  std::vector<long double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = (y[i] - mean) / sd;

  std::vector<GaussianPrediction> out;
  for (const auto& q : queries) {
    std::vector<long double> kq(n);
    for (std::size_t i = 0; i < n; ++i) kq[i] = kernel(k, q, x[i], center);
    long double mu = 0.0L, reduction = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
      long double row = 0.0L;
      for (std::size_t j = 0; j < n; ++j) row += kinv[i][j] * z[j];
      mu += kq[i] * row;
      long double kk = 0.0L;
      for (std::size_t j = 0; j < n; ++j) kk += kinv[i][j] * kq[j];
      reduction += kq[i] * kk;
    }
    const long double v = sd * sd * std::max(kernel(k, q, q, center) - reduction, 0.0L);
    out.push_back({static_cast<double>(mean + sd * mu), static_cast<double>(std::sqrt(v)), static_cast<double>(v)});
  }
  return out;
}

// Coefficient of determination straight from its definition.
inline double r_squared(const std::vector<double>& pred, const std::vector<double>& truth) {
  double m = 0.0;
  for (double t : truth) m += t;
  m /= static_cast<double>(truth.size());
  double res = 0.0, tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    res += (truth[i] - pred[i]) * (truth[i] - pred[i]);
    tot += (truth[i] - m) * (truth[i] - m);
  }
  return 1.0 - res / tot;
}

}  // namespace oracle
