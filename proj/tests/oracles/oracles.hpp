#pragma once

// Reference implementations used only by the tests. Nothing here calls into
// the library: every quantity is recomputed from its textbook definition.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace naive {

constexpr double kPi = 3.14159265358979323846;

using Matrix = std::vector<std::vector<double>>;

// Lanczos approximation (g = 7, n = 9), reflection for x < 0.5.
inline double lanczos_lgamma(double x) {
  static const double c[9] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                              771.32342877765313,   -176.61502916214059,   12.507343278686905,
                              -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) return std::log(kPi / std::fabs(std::sin(kPi * x))) - lanczos_lgamma(1.0 - x);
  x -= 1.0;
  double a = c[0];
  const double t = x + 7.5;
  for (int k = 1; k < 9; ++k) a += c[k] / (x + k);
  return 0.5 * std::log(2.0 * kPi) + (x + 0.5) * std::log(t) - t + std::log(a);
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double euclid(const std::vector<double>& u, const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) s += (u[k] - v[k]) * (u[k] - v[k]);
  return std::sqrt(s);
}

inline double normal_logpdf(double x, double mean, double var) {
  return -0.5 * std::log(2.0 * kPi * var) - 0.5 * (x - mean) * (x - mean) / var;
}

inline double inverse_gamma_logpdf(double x, double shape, double scale) {
  return shape * std::log(scale) - lanczos_lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

inline double gamma_rate_logpdf(double x, double shape, double rate) {
  return shape * std::log(rate) - lanczos_lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

inline double beta_logpdf(double t, double mu, double phi) {
  const double p = mu * phi, q = (1.0 - mu) * phi;
  return lanczos_lgamma(p + q) - lanczos_lgamma(p) - lanczos_lgamma(q) + (p - 1.0) * std::log(t) +
         (q - 1.0) * std::log(1.0 - t);
}

// Dense inverse by the adjugate-free row reduction on an augmented matrix,
// with partial pivoting.
inline Matrix inverse(Matrix a) {
  const std::size_t n = a.size();
  for (std::size_t r = 0; r < n; ++r) {
    a[r].resize(2 * n, 0.0);
    a[r][n + r] = 1.0;
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t best = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[best][c])) best = r;
    std::swap(a[c], a[best]);
    if (a[c][c] == 0.0) throw std::runtime_error("singular");
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < 2 * n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  Matrix inv(n, std::vector<double>(n));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < n; ++k) inv[r][k] = a[r][n + k] / a[r][r];
  return inv;
}

// Determinant by cofactor expansion (small matrices only).
inline double determinant(const Matrix& m) {
  const std::size_t n = m.size();
  if (n == 1) return m[0][0];
  double det = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    Matrix minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<double> row;
      for (std::size_t k = 0; k < n; ++k)
        if (k != c) row.push_back(m[r][k]);
      minor.push_back(row);
    }
    det += (c % 2 == 0 ? 1.0 : -1.0) * m[0][c] * determinant(minor);
  }
  return det;
}

inline double mvn_logpdf(const std::vector<double>& x, const Matrix& cov) {
  const auto prec = inverse(cov);
  double q = 0.0;
  for (std::size_t r = 0; r < x.size(); ++r)
    for (std::size_t c = 0; c < x.size(); ++c) q += x[r] * prec[r][c] * x[c];
  return -0.5 * static_cast<double>(x.size()) * std::log(2.0 * kPi) - 0.5 * std::log(determinant(cov)) - 0.5 * q;
}

// Composite Simpson rule on [lo, hi] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double lo, double hi, int n) {
  const double h = (hi - lo) / n;
  double s = f(lo) + f(hi);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(lo + k * h);
  return s * h / 3.0;
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Least-squares rotation/reflection of centred 2-D points X onto centred Ref
// by brute-force search over angles, for both orientations, refined by
// successive grid narrowing. Returns the minimal squared discrepancy.
inline double procrustes_grid_objective(const std::vector<std::array<double, 2>>& X,
                                        const std::vector<std::array<double, 2>>& Ref) {
  auto centre = [](std::vector<std::array<double, 2>> P) {
    double mx = 0, my = 0;
    for (auto& p : P) mx += p[0], my += p[1];
    mx /= P.size(), my /= P.size();
    for (auto& p : P) p[0] -= mx, p[1] -= my;
    return P;
  };
  const auto A = centre(X), B = centre(Ref);
  auto objective = [&](double theta, bool reflect) {
    const double c = std::cos(theta), s = std::sin(theta);
    double sum = 0.0;
    for (std::size_t k = 0; k < A.size(); ++k) {
      const double x = A[k][0], y = reflect ? -A[k][1] : A[k][1];
      const double rx = c * x - s * y, ry = s * x + c * y;
      sum += (rx - B[k][0]) * (rx - B[k][0]) + (ry - B[k][1]) * (ry - B[k][1]);
    }
    return sum;
  };
  double best = std::numeric_limits<double>::infinity();
  for (bool reflect : {false, true}) {
    double lo = 0.0, hi = 2.0 * kPi, centre_angle = 0.0;
    for (int level = 0; level < 6; ++level) {
      const int n = 2000;
      double local = std::numeric_limits<double>::infinity();
      for (int k = 0; k <= n; ++k) {
        const double th = lo + (hi - lo) * k / n;
        const double v = objective(th, reflect);
        if (v < local) local = v, centre_angle = th;
      }
      best = std::min(best, local);
      const double width = (hi - lo) / n * 4.0;
      lo = centre_angle - width;
      hi = centre_angle + width;
    }
  }
  return best;
}

// Reference CDFs for goodness-of-fit tests.
inline double normal_cdf(double x, double mean = 0.0, double sd = 1.0) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

// Student t with 2 degrees of freedom, unit scale: closed form.
inline double student_t2_cdf(double x) { return 0.5 + x / (2.0 * std::sqrt(2.0 + x * x)); }

inline double exponential_cdf(double x, double rate) { return x <= 0 ? 0.0 : 1.0 - std::exp(-rate * x); }

// Regularised upper incomplete gamma Q(a, x) by series / continued fraction.
inline double gamma_q(double a, double x) {
  if (x <= 0) return 1.0;
  const double lg = lanczos_lgamma(a);
  if (x < a + 1.0) {
    double sum = 1.0 / a, term = sum;
    for (int n = 1; n < 10000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - lg);
  }
  // Lentz continued fraction
  double b = x + 1.0 - a, c = 1.0 / 1e-300, d = 1.0 / b, h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::fabs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - lg) * h;
}

// Inverse-gamma(shape, scale) CDF: P(X <= x) = Q(shape, scale / x).
inline double inverse_gamma_cdf(double x, double shape, double scale) { return x <= 0 ? 0.0 : gamma_q(shape, scale / x); }

// Kolmogorov-Smirnov statistic of a sample against a continuous CDF.
inline double ks(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double f = cdf(x[k]);
    d = std::max({d, (k + 1) / n - f, f - k / n});
  }
  return d;
}

// Asymptotic 1% critical value of the one-sample KS statistic.
inline double ks_critical_1pct(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) mx += x[k], my += y[k];
  mx /= n, my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace naive
