#pragma once

#include <Eigen/Dense>

namespace roughlab {

// Riemann-Liouville kernel K(t,s) = (t-s)^(H-1/2) on s < t.
class KernelSpec {
 public:
  explicit KernelSpec(double hurst);

  double hurst() const noexcept { return hurst_; }
  // H - 1/2
  double exponent() const noexcept { return hurst_ - 0.5; }
  // H + 1/2
  double h_plus() const noexcept { return hurst_ + 0.5; }
  bool brownian() const noexcept { return hurst_ == 0.5; }

 private:
  double hurst_;
};

double k_eval(const KernelSpec& spec, double t, double s);

// Closed-form integral of K(t, .) over [a, b].
double k_primitive(const KernelSpec& spec, double t, double a, double b);

// Cov(V_s, V_t).
double cov_vv(const KernelSpec& spec, double s, double t);

// Integral over [0,t] of K(t,r) r^beta.
double weighted_kernel_integral(const KernelSpec& spec, double t, double beta);

// B(H+1/2, beta+1) t^(beta+H+1/2).
double beta_identity_rhs(const KernelSpec& spec, double t, double beta);

// Integral over [0,t] of |K(t,r) - K(t_i,r)| (t-r)^alpha.
double delta_k_weighted_integral(const KernelSpec& spec, double t, double t_i, double alpha);

double beta_function(double a, double b);

// Unit-step panel integral of (m-u)^(H-1/2) (m+d-u)^(H-1/2) over u in [0,1];
// m >= 1, d >= 0. Grid covariances are h^(2H) times partial sums of these.
double unit_panel_product(const KernelSpec& spec, long m, long d);

// Unit-step kernel mass ((m)^(H+1/2) - (m-1)^(H+1/2))/(H+1/2) for m >= 1.
double unit_kernel_mass(const KernelSpec& spec, long m);

// Cov(V_{t_i}, V_{t_j}) for i,j = 1..n on a uniform grid with spacing h.
Eigen::MatrixXd grid_vv_covariance(const KernelSpec& spec, long n, double h);

}  // namespace roughlab
