#include "roughlab/kernel.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>

#include "roughlab/errors.hpp"
#include "roughlab/quadrature.hpp"

namespace roughlab {

KernelSpec::KernelSpec(double hurst) : hurst_(hurst) {
  if (!(hurst > 0.0 && hurst <= 0.5)) {
    throw DomainError("Hurst exponent must lie in (0, 1/2]");
  }
}

double k_eval(const KernelSpec& spec, double t, double s) {
  if (t < 0.0 || s < 0.0) throw DomainError("kernel arguments must be non-negative");
  if (s >= t) return 0.0;
  return std::pow(t - s, spec.exponent());
}

double k_primitive(const KernelSpec& spec, double t, double a, double b) {
  if (a < 0.0 || b < a) throw DomainError("k_primitive requires 0 <= a <= b");
  if (a >= t) return 0.0;
  const double hp = spec.h_plus();
  const double upper = std::min(b, t);
  return (std::pow(t - a, hp) - std::pow(t - upper, hp)) / hp;
}

double cov_vv(const KernelSpec& spec, double s, double t) {
  if (s < 0.0 || t < 0.0) throw DomainError("covariance times must be non-negative");
  const double lo = std::min(s, t);
  const double hi = std::max(s, t);
  if (lo == 0.0) return 0.0;
  const double two_h = 2.0 * spec.hurst();
  if (lo == hi) return std::pow(lo, two_h) / two_h;
  if (spec.brownian()) return lo;

  const double gap = hi - lo;
  const double hp = spec.h_plus();
  const double power = 1.0 / hp;
  const double alpha = spec.exponent();
  auto integrand = [&](double v) { return std::pow(gap + std::pow(v, power), alpha) / hp; };
  const double upper = std::pow(lo, hp);
  const double knee = std::min(std::pow(gap, hp), upper);
  return quad::adaptive(integrand, 0.0, knee, 0.5 * quad::kDefaultTolerance) +
         quad::adaptive(integrand, knee, upper, 0.5 * quad::kDefaultTolerance);
}

double beta_function(double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("Beta function needs positive arguments");
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

double beta_identity_rhs(const KernelSpec& spec, double t, double beta) {
  if (!(beta > -1.0)) throw DomainError("beta must exceed -1");
  if (!(t > 0.0)) throw DomainError("t must be positive");
  return beta_function(spec.h_plus(), beta + 1.0) * std::pow(t, beta + spec.h_plus());
}

double weighted_kernel_integral(const KernelSpec& spec, double t, double beta) {
  if (!(beta > -1.0)) throw DomainError("beta must exceed -1");
  if (!(t > 0.0)) throw DomainError("t must be positive");
  const double alpha = spec.exponent();
  const double hp = spec.h_plus();
  const double half = 0.5 * t;
  const double tol = 1e-15 * std::max(1.0, std::pow(t, beta + hp));

  // r in [0, t/2]: r = w^(1/(beta+1)) absorbs r^beta.
  const double q = 1.0 / (beta + 1.0);
  auto near_origin = [&](double w) { return q * std::pow(t - std::pow(w, q), alpha); };
  const double left = quad::adaptive(near_origin, 0.0, std::pow(half, beta + 1.0), tol);

  // t - r = v^(1/(H+1/2)) absorbs the kernel singularity.
  const double p = 1.0 / hp;
  auto near_diagonal = [&](double v) { return std::pow(t - std::pow(v, p), beta) / hp; };
  const double right = quad::adaptive(near_diagonal, 0.0, std::pow(half, hp), tol);
  return left + right;
}

double delta_k_weighted_integral(const KernelSpec& spec, double t, double t_i, double alpha) {
  if (t_i < 0.0) throw DomainError("t_i must be non-negative");
  if (t_i > t) throw DomainError("delta kernel integral requires t_i <= t");
  if (alpha < 0.0) throw DomainError("alpha must be non-negative");
  if (t_i == t) return 0.0;

  const double hp = spec.h_plus();
  const double gap = t - t_i;
  // On [t_i, t) the second kernel vanishes.
  const double recent = std::pow(gap, alpha + hp) / (alpha + hp);
  if (spec.brownian() || t_i == 0.0) return recent;

  // On [0, t_i): u = t_i - r = w^(1/(H+1/2)).
  const double p = 1.0 / hp;
  const double decay = 0.5 - spec.hurst();
  auto integrand = [&](double w) {
    if (w == 0.0) return std::pow(gap, alpha) / hp;
    const double u = std::pow(w, p);
    const double ratio_gap = -std::expm1(decay * std::log1p(-gap / (gap + u)));
    return ratio_gap * std::pow(gap + u, alpha) / hp;
  };
  const double upper = std::pow(t_i, hp);
  const double knee = std::min(std::pow(gap, hp), upper);
  const double tol = 1e-14;
  const double past =
      quad::graded(integrand, 0.0, knee, tol) + quad::adaptive(integrand, knee, upper, tol);
  return recent + past;
}

double unit_kernel_mass(const KernelSpec& spec, long m) {
  if (m < 1) throw DomainError("unit kernel mass index must be >= 1");
  const double hp = spec.h_plus();
  return (std::pow(static_cast<double>(m), hp) - std::pow(static_cast<double>(m - 1), hp)) / hp;
}

double unit_panel_product(const KernelSpec& spec, long m, long d) {
  if (m < 1 || d < 0) throw DomainError("unit panel product requires m >= 1, d >= 0");
  if (spec.brownian()) return 1.0;
  const double alpha = spec.exponent();
  const double dm = static_cast<double>(m);
  const double dd = static_cast<double>(d);
  if (d == 0) {
    const double two_h = 2.0 * spec.hurst();
    return (std::pow(dm, two_h) - std::pow(dm - 1.0, two_h)) / two_h;
  }
  if (m == 1) {
    const double hp = spec.h_plus();
    const double p = 1.0 / hp;
    auto integrand = [&](double w) { return std::pow(dd + std::pow(w, p), alpha) / hp; };
    return quad::adaptive(integrand, 0.0, 1.0, 1e-15);
  }
  auto integrand = [&](double u) { return std::pow((dm - u) * (dm + dd - u), alpha); };
  using boost::math::quadrature::gauss;
  if (m < 8) return gauss<double, 20>::integrate(integrand, 0.0, 1.0);
  if (m < 64) return gauss<double, 10>::integrate(integrand, 0.0, 1.0);
  return gauss<double, 7>::integrate(integrand, 0.0, 1.0);
}

Eigen::MatrixXd grid_vv_covariance(const KernelSpec& spec, long n, double h) {
  if (n < 1 || !(h > 0.0)) throw DomainError("grid covariance needs n >= 1 and h > 0");
  const double scale = std::pow(h, 2.0 * spec.hurst());
  Eigen::MatrixXd cov(n, n);
  for (long d = 0; d < n; ++d) {
    double partial = 0.0;
    for (long i = 1; i + d <= n; ++i) {
      partial += unit_panel_product(spec, i, d);
      cov(i - 1, i - 1 + d) = scale * partial;
      cov(i - 1 + d, i - 1) = scale * partial;
    }
  }
  const double two_h = 2.0 * spec.hurst();
  for (long i = 1; i <= n; ++i) {
    cov(i - 1, i - 1) = std::pow(h * static_cast<double>(i), two_h) / two_h;
  }
  return cov;
}

}  // namespace roughlab
