#pragma once

#include <vector>

#include "roughlab/grid.hpp"
#include "roughlab/model.hpp"

namespace roughlab {

double v_variance(double hurst, double t);
double v_moment(double hurst, double t, int p);
double v_expmoment(double hurst, double t, double nu);

// Gaussian means E[psi(V_t)] and E[psi(V_t)^2]. Polynomial families are
// expanded once into even-moment coefficients.
class VolMoments {
 public:
  VolMoments(const VolSpec& vol, double hurst);

  double mean_psi(double t) const;
  double mean_psi_sq(double t) const;

 private:
  double polynomial_mean(const std::vector<double>& even_coeffs, double t) const;

  VolSpec vol_;
  double hurst_;
  // Coefficient of Var^k in E[psi] and E[psi^2].
  std::vector<double> psi_terms_;
  std::vector<double> psi_sq_terms_;
};

double expected_psi(const VolSpec& vol, double hurst, double t);
double expected_psi_sq(const VolSpec& vol, double hurst, double t);

// E[phi(X_T)] - E[phi(Xbar_T)] for quadratic phi and zeta = 0.
double exact_weak_error_quadratic(const ModelConfig& config, const UniformGrid& grid);

struct RegularityReport {
  double exponent = 0.0;
  double constant_psi = 0.0;
  double constant_psi_sq = 0.0;
  double constant = 0.0;
  // Largest ratio on [t_i, t_{i+1}) for each i.
  std::vector<double> per_interval;
};

RegularityReport verify_weak_regularity(const VolSpec& vol, double hurst, const UniformGrid& grid,
                                        int lattice = 32);

struct RateOneCheck {
  double lhs = 0.0;
  double bound = 0.0;
};

RateOneCheck trick_rate_one_check(double gamma, double horizon, long steps);

}  // namespace roughlab
