#include "roughlab/model.hpp"

#include <cmath>

#include "roughlab/errors.hpp"

namespace roughlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::vector<double> derivative(const std::vector<double>& c) {
  std::vector<double> d;
  for (std::size_t k = 1; k < c.size(); ++k) d.push_back(static_cast<double>(k) * c[k]);
  return d;
}

double horner(const std::vector<double>& c, double v) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * v + *it;
  return acc;
}

void check_order(int order, int max_order) {
  if (order < 0 || order > max_order) throw DomainError("derivative order out of range");
}

double logistic(double y) {
  if (y >= 0.0) return 1.0 / (1.0 + std::exp(-y));
  const double e = std::exp(y);
  return e / (1.0 + e);
}

}  // namespace

VolSpec::VolSpec(Family family) : family_(std::move(family)) {
  std::visit(overloaded{
                 [](const ExponentialVol& f) {
                   if (!std::isfinite(f.nu)) throw DomainError("exponential volatility needs finite nu");
                 },
                 [this](const PolynomialVol& f) {
                   if (f.coefficients.empty()) throw DomainError("polynomial volatility needs coefficients");
                   for (double c : f.coefficients) {
                     if (!std::isfinite(c)) throw DomainError("polynomial coefficients must be finite");
                   }
                   d1_ = derivative(f.coefficients);
                   d2_ = derivative(d1_);
                 },
                 [](const ShiftedLinearVol& f) {
                   if (!std::isfinite(f.shift) || !std::isfinite(f.slope)) {
                     throw DomainError("shifted linear volatility needs finite parameters");
                   }
                 },
             },
             family_);
}

std::string VolSpec::name() const {
  return std::visit(overloaded{[](const ExponentialVol&) { return std::string("exponential"); },
                               [](const PolynomialVol&) { return std::string("polynomial"); },
                               [](const ShiftedLinearVol&) { return std::string("shifted_linear"); }},
                    family_);
}

double VolSpec::psi(int order, double v) const {
  check_order(order, 2);
  return std::visit(overloaded{
                        [&](const ExponentialVol& f) { return std::pow(f.nu, order) * std::exp(f.nu * v); },
                        [&](const PolynomialVol& f) {
                          if (order == 0) return horner(f.coefficients, v);
                          return horner(order == 1 ? d1_ : d2_, v);
                        },
                        [&](const ShiftedLinearVol& f) {
                          if (order == 0) return f.shift + f.slope * v;
                          return order == 1 ? f.slope : 0.0;
                        },
                    },
                    family_);
}

double VolSpec::psi_sq(int order, double v) const {
  check_order(order, 2);
  if (const auto* e = std::get_if<ExponentialVol>(&family_)) {
    return std::pow(2.0 * e->nu, order) * std::exp(2.0 * e->nu * v);
  }
  const double p0 = psi(0, v);
  if (order == 0) return p0 * p0;
  const double p1 = psi(1, v);
  if (order == 1) return 2.0 * p0 * p1;
  return 2.0 * (p1 * p1 + p0 * psi(2, v));
}

void VolSpec::psi_values(std::span<const double> v, std::span<double> out) const {
  if (v.size() != out.size()) throw DomainError("psi_values size mismatch");
  if (const auto* e = std::get_if<ExponentialVol>(&family_)) {
    const double nu = e->nu;
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::exp(nu * v[i]);
    return;
  }
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = psi(0, v[i]);
}

double VolSpec::growth_exponent() const {
  return std::visit(overloaded{[](const ExponentialVol& f) { return std::abs(f.nu); },
                               [](const PolynomialVol&) { return 1.0; },
                               [](const ShiftedLinearVol&) { return 1.0; }},
                    family_);
}

bool VolSpec::is_constant() const {
  return std::visit(overloaded{[](const ExponentialVol& f) { return f.nu == 0.0; },
                               [this](const PolynomialVol&) {
                                 for (double c : d1_) {
                                   if (c != 0.0) return false;
                                 }
                                 return true;
                               },
                               [](const ShiftedLinearVol& f) { return f.slope == 0.0; }},
                    family_);
}

PayoffSpec::PayoffSpec(Family family) : family_(std::move(family)) {
  std::visit(overloaded{
                 [](const QuadraticPayoff& f) {
                   if (!std::isfinite(f.a) || !std::isfinite(f.b) || !std::isfinite(f.c)) {
                     throw DomainError("quadratic payoff needs finite coefficients");
                   }
                 },
                 [](const MonomialPayoff& f) {
                   if (f.degree < 0) throw DomainError("monomial degree must be non-negative");
                 },
                 [](const SmoothCallPayoff& f) {
                   if (!(f.smoothing > 0.0) || !std::isfinite(f.strike)) {
                     throw DomainError("smooth call needs finite strike and positive smoothing");
                   }
                 },
             },
             family_);
}

std::string PayoffSpec::name() const {
  return std::visit(overloaded{[](const QuadraticPayoff&) { return std::string("quadratic"); },
                               [](const MonomialPayoff&) { return std::string("monomial"); },
                               [](const SmoothCallPayoff&) { return std::string("smooth_call"); }},
                    family_);
}

double PayoffSpec::phi(int order, double x) const {
  check_order(order, 3);
  return std::visit(
      overloaded{
          [&](const QuadraticPayoff& f) {
            switch (order) {
              case 0: return (f.a * x + f.b) * x + f.c;
              case 1: return 2.0 * f.a * x + f.b;
              case 2: return 2.0 * f.a;
              default: return 0.0;
            }
          },
          [&](const MonomialPayoff& f) {
            const int n = f.degree;
            if (order > n) return 0.0;
            double coeff = 1.0;
            for (int k = 0; k < order; ++k) coeff *= static_cast<double>(n - k);
            return coeff * std::pow(x, n - order);
          },
          [&](const SmoothCallPayoff& f) {
            const double lam = f.smoothing;
            const double y = (x - f.strike) / lam;
            if (order == 0) {
              return y > 0.0 ? lam * (y + std::log1p(std::exp(-y))) : lam * std::log1p(std::exp(y));
            }
            const double s = logistic(y);
            const double sc = logistic(-y);
            if (order == 1) return s;
            if (order == 2) return s * sc / lam;
            return s * sc * (sc - s) / (lam * lam);
          },
      },
      family_);
}

double PayoffSpec::growth_exponent() const {
  return std::visit(overloaded{[](const QuadraticPayoff&) { return 2.0; },
                               [](const MonomialPayoff& f) { return static_cast<double>(f.degree); },
                               [](const SmoothCallPayoff&) { return 1.0; }},
                    family_);
}

bool PayoffSpec::is_affine() const {
  return std::visit(overloaded{[](const QuadraticPayoff& f) { return f.a == 0.0; },
                               [](const MonomialPayoff& f) { return f.degree <= 1; },
                               [](const SmoothCallPayoff&) { return false; }},
                    family_);
}

double ModelConfig::rho_bar() const { return std::sqrt(std::max(0.0, 1.0 - rho * rho)); }

void ModelConfig::validate() const {
  if (!std::isfinite(x0)) throw DomainError("x0 must be finite");
  if (!std::isfinite(zeta)) throw DomainError("zeta must be finite");
  if (!(std::abs(rho) <= 1.0)) throw DomainError("rho must satisfy |rho| <= 1");
  if (!(hurst > 0.0 && hurst <= 0.5)) throw DomainError("H must lie in (0, 1/2]");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("T must be positive");
}

}  // namespace roughlab
