#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace roughlab {

struct ExponentialVol {
  double nu = 0.0;
};
// Ascending coefficients: psi(v) = sum_k c_k v^k.
struct PolynomialVol {
  std::vector<double> coefficients;
};
// psi(v) = shift + slope * v
struct ShiftedLinearVol {
  double shift = 0.0;
  double slope = 0.0;
};

class VolSpec {
 public:
  using Family = std::variant<ExponentialVol, PolynomialVol, ShiftedLinearVol>;

  explicit VolSpec(Family family);
  static VolSpec exponential(double nu) { return VolSpec(ExponentialVol{nu}); }
  static VolSpec polynomial(std::vector<double> c) { return VolSpec(PolynomialVol{std::move(c)}); }
  static VolSpec shifted_linear(double a, double b) { return VolSpec(ShiftedLinearVol{a, b}); }
  static VolSpec constant(double c) { return polynomial({c}); }

  const Family& family() const noexcept { return family_; }
  std::string name() const;

  // psi^(order)(v), order 0..2
  double psi(int order, double v) const;
  // (psi^2)^(order)(v), order 0..2
  double psi_sq(int order, double v) const;
  double operator()(double v) const { return psi(0, v); }

  void psi_values(std::span<const double> v, std::span<double> out) const;

  // kappa with |psi^(k)(v)| <= C (1 + exp(kappa |v|)).
  double growth_exponent() const;
  bool is_constant() const;

 private:
  Family family_;
  std::vector<double> d1_, d2_;
};

struct QuadraticPayoff {
  double a = 1.0, b = 0.0, c = 0.0;
};
struct MonomialPayoff {
  int degree = 1;
};
// lambda * log(1 + exp((x - strike) / lambda))
struct SmoothCallPayoff {
  double strike = 0.0;
  double smoothing = 0.05;
};

class PayoffSpec {
 public:
  using Family = std::variant<QuadraticPayoff, MonomialPayoff, SmoothCallPayoff>;

  explicit PayoffSpec(Family family);
  static PayoffSpec quadratic(double a, double b, double c) { return PayoffSpec(QuadraticPayoff{a, b, c}); }
  static PayoffSpec monomial(int n) { return PayoffSpec(MonomialPayoff{n}); }
  static PayoffSpec smooth_call(double strike, double smoothing = 0.05) {
    return PayoffSpec(SmoothCallPayoff{strike, smoothing});
  }

  const Family& family() const noexcept { return family_; }
  std::string name() const;

  // phi^(order)(x), order 0..3
  double phi(int order, double x) const;
  double operator()(double x) const { return phi(0, x); }

  // kappa with |phi^(k)(x)| <= C (1 + |x|^kappa).
  double growth_exponent() const;
  bool is_affine() const;

 private:
  Family family_;
};

struct ModelConfig {
  double x0 = 0.0;
  double zeta = 0.0;
  double rho = 0.0;
  double hurst = 0.25;
  double horizon = 1.0;
  VolSpec vol = VolSpec::exponential(0.0);
  PayoffSpec payoff = PayoffSpec::quadratic(1.0, 0.0, 0.0);

  double rho_bar() const;
  void validate() const;
};

}  // namespace roughlab
