#include "roughlab/analytic_moments.hpp"

#include <algorithm>
#include <cmath>

#include "roughlab/errors.hpp"
#include "roughlab/quadrature.hpp"

namespace roughlab {

namespace {

double double_factorial_odd(int p) {
  // (p - 1)!! for even p
  double acc = 1.0;
  for (int k = p - 1; k > 1; k -= 2) acc *= static_cast<double>(k);
  return acc;
}

void check_time(double t) {
  if (!(t >= 0.0)) throw DomainError("time must be non-negative");
}

// Even-moment expansion: returns e with E[poly(Z sqrt(var))] = sum_k e_k var^k.
std::vector<double> gaussian_terms(const std::vector<double>& c) {
  std::vector<double> e;
  for (std::size_t k = 0; k < c.size(); k += 2) e.push_back(c[k] * double_factorial_odd(static_cast<int>(k)));
  return e;
}

std::vector<double> square(const std::vector<double>& c) {
  std::vector<double> s(2 * c.size() - 1, 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = 0; j < c.size(); ++j) s[i + j] += c[i] * c[j];
  }
  return s;
}

}  // namespace

double v_variance(double hurst, double t) {
  check_time(t);
  return std::pow(t, 2.0 * hurst) / (2.0 * hurst);
}

double v_moment(double hurst, double t, int p) {
  check_time(t);
  if (p < 0) throw DomainError("moment order must be non-negative");
  if (p % 2 == 1) return 0.0;
  return double_factorial_odd(p) * std::pow(v_variance(hurst, t), p / 2);
}

double v_expmoment(double hurst, double t, double nu) {
  check_time(t);
  return std::exp(nu * nu * std::pow(t, 2.0 * hurst) / (4.0 * hurst));
}

VolMoments::VolMoments(const VolSpec& vol, double hurst) : vol_(vol), hurst_(hurst) {
  if (!(hurst > 0.0 && hurst <= 0.5)) throw DomainError("H must lie in (0, 1/2]");
  std::vector<double> coeffs;
  if (const auto* p = std::get_if<PolynomialVol>(&vol.family())) coeffs = p->coefficients;
  if (const auto* s = std::get_if<ShiftedLinearVol>(&vol.family())) coeffs = {s->shift, s->slope};
  if (!coeffs.empty()) {
    psi_terms_ = gaussian_terms(coeffs);
    psi_sq_terms_ = gaussian_terms(square(coeffs));
  }
}

double VolMoments::polynomial_mean(const std::vector<double>& terms, double t) const {
  const double var = v_variance(hurst_, t);
  double acc = 0.0;
  for (auto it = terms.rbegin(); it != terms.rend(); ++it) acc = acc * var + *it;
  return acc;
}

double VolMoments::mean_psi(double t) const {
  check_time(t);
  if (const auto* e = std::get_if<ExponentialVol>(&vol_.family())) return v_expmoment(hurst_, t, e->nu);
  return polynomial_mean(psi_terms_, t);
}

double VolMoments::mean_psi_sq(double t) const {
  check_time(t);
  if (const auto* e = std::get_if<ExponentialVol>(&vol_.family())) {
    return v_expmoment(hurst_, t, 2.0 * e->nu);
  }
  return polynomial_mean(psi_sq_terms_, t);
}

double expected_psi(const VolSpec& vol, double hurst, double t) { return VolMoments(vol, hurst).mean_psi(t); }

double expected_psi_sq(const VolSpec& vol, double hurst, double t) {
  return VolMoments(vol, hurst).mean_psi_sq(t);
}

double exact_weak_error_quadratic(const ModelConfig& config, const UniformGrid& grid) {
  config.validate();
  if (config.zeta != 0.0) throw DomainError("analytic weak error requires zeta = 0");
  const auto* quadratic = std::get_if<QuadraticPayoff>(&config.payoff.family());
  if (quadratic == nullptr) throw DomainError("analytic weak error requires a quadratic payoff");
  if (grid.horizon() != config.horizon) throw DomainError("grid horizon differs from model horizon");

  const VolMoments moments(config.vol, config.hurst);
  const long n = grid.steps();
  const double tol = quad::kDefaultTolerance / static_cast<double>(n);
  // Sum over intervals of the integral of g(t) - g(t_i); no cancellation
  // between the integral and the Riemann sum.
  double total = 0.0;
  for (long i = 0; i < n; ++i) {
    const double lo = grid.node(i);
    const double hi = grid.node(i + 1);
    const double left_value = moments.mean_psi_sq(lo);
    auto gap = [&](double t) { return moments.mean_psi_sq(t) - left_value; };
    total += (i == 0 && config.hurst < 0.5) ? quad::graded(gap, lo, hi, tol) : quad::adaptive(gap, lo, hi, tol);
  }
  return quadratic->a * total;
}

RegularityReport verify_weak_regularity(const VolSpec& vol, double hurst, const UniformGrid& grid, int lattice) {
  if (lattice < 2) throw DomainError("lattice needs at least two points per interval");
  const VolMoments moments(vol, hurst);
  RegularityReport report;
  report.exponent = 2.0 * hurst;
  const double gamma = report.exponent;
  for (long i = 0; i < grid.steps(); ++i) {
    const double ti = grid.node(i);
    const double base_psi = moments.mean_psi(ti);
    const double base_sq = moments.mean_psi_sq(ti);
    double worst = 0.0;
    for (int k = 1; k < lattice; ++k) {
      const double t = ti + grid.dt() * static_cast<double>(k) / lattice;
      const double denom = std::pow(t, gamma) - std::pow(ti, gamma);
      const double r_psi = std::abs(moments.mean_psi(t) - base_psi) / denom;
      const double r_sq = std::abs(moments.mean_psi_sq(t) - base_sq) / denom;
      report.constant_psi = std::max(report.constant_psi, r_psi);
      report.constant_psi_sq = std::max(report.constant_psi_sq, r_sq);
      worst = std::max({worst, r_psi, r_sq});
    }
    report.per_interval.push_back(worst);
  }
  report.constant = std::max(report.constant_psi, report.constant_psi_sq);
  return report;
}

RateOneCheck trick_rate_one_check(double gamma, double horizon, long steps) {
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  const UniformGrid grid(horizon, steps);
  const double dt = grid.dt();
  double lhs = 0.0;
  for (long i = 0; i < steps; ++i) {
    const double a = grid.node(i);
    const double b = grid.node(i + 1);
    lhs += (std::pow(b, gamma + 1.0) - std::pow(a, gamma + 1.0)) / (gamma + 1.0) - std::pow(a, gamma) * dt;
  }
  return {lhs, std::pow(horizon, 1.0 + gamma) * dt};
}

}  // namespace roughlab
