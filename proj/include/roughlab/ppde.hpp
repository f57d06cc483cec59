#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "roughlab/gaussian_sampler.hpp"
#include "roughlab/kernel.hpp"
#include "roughlab/model.hpp"
#include "roughlab/rng.hpp"
#include "roughlab/stats.hpp"

namespace roughlab {

// Values of the forward variance curve at s_j = anchor + j (horizon - anchor) / n,
// j = 0..n. values[0] is the current state V_t.
class ForwardCurve {
 public:
  ForwardCurve(double anchor, double horizon, std::vector<double> values);

  static ForwardCurve constant(double anchor, double horizon, long steps, double value);
  static ForwardCurve from_function(double anchor, double horizon, long steps,
                                    const std::function<double(double)>& f);
  // Piecewise-linear interpolation of (s, w) knots onto the sub-grid; flat
  // extrapolation outside the knot range.
  static ForwardCurve interpolate(double anchor, double horizon, long steps, std::span<const double> s,
                                  std::span<const double> w);

  double anchor() const noexcept { return anchor_; }
  double horizon() const noexcept { return horizon_; }
  long steps() const noexcept { return static_cast<long>(values_.size()) - 1; }
  double dt() const noexcept;
  double node(long j) const noexcept;
  double value(long j) const { return values_.at(static_cast<std::size_t>(j)); }
  std::span<const double> values() const noexcept { return values_; }

  // The same curve seen from s_1: anchor s_1, values w(s_1..s_n).
  ForwardCurve advanced() const;

 private:
  double anchor_;
  double horizon_;
  std::vector<double> values_;
};

// Perturbation direction: explicit values at s_0..s_n, or the kernel K(., t).
class Direction {
 public:
  static Direction nodal(std::vector<double> values);
  static Direction singular_kernel() { return Direction(); }

  bool singular() const noexcept { return singular_; }
  std::span<const double> values() const noexcept { return values_; }

  // Direction at the left endpoints s_0..s_{n-1}. The kernel direction is
  // zero at s_0 and the cell average of K(., t) on [s_{j-1}, s_j] at s_j.
  std::vector<double> left_endpoints(const KernelSpec& kernel, double dt, long steps) const;

 private:
  Direction() = default;
  bool singular_ = true;
  std::vector<double> values_;
};

// Coefficients K~_m = dt^(H-1/2) * unit mass m, the regression of V_{s_{j+m}}
// on dW_j / dt; m = 0 maps to zero.
std::vector<double> kernel_cell_averages(const KernelSpec& kernel, double dt, long steps);

// Joint law of the noise on (t, T] split at s_1: the first increment together
// with the s_1-cell contributions to I^t at s_1..s_{n-1}, and the exact law of
// the remaining noise on (s_1, T]. I^t = first-cell part + I^{s_1}.
class ConditionalLaw {
 public:
  ConditionalLaw(double hurst, double anchor, double horizon, long steps);

  const KernelSpec& kernel() const noexcept { return kernel_; }
  long steps() const noexcept { return steps_; }
  double dt() const noexcept { return dt_; }
  double anchor() const noexcept { return anchor_; }
  double horizon() const noexcept { return horizon_; }

  // One path: 3n normals from the stream. increment[j] = I^t at s_j and
  // increment_next[j] = I^{s_1} at s_j for j = 0..n-1 (both zero where
  // undefined); dw and dwbar are the increments on the sub-grid.
  void draw(PathStream& stream, std::span<double> increment, std::span<double> increment_next,
            std::span<double> dw, std::span<double> dwbar, std::vector<double>& scratch) const;

 private:
  KernelSpec kernel_;
  double anchor_;
  double horizon_;
  long steps_;
  double dt_;
  double first_scale_;
  Eigen::MatrixXd first_factor_;
  Eigen::MatrixXd rest_factor_;
};

// Per-path arrays on the sub-grid, path-major. V and V_next hold the
// variance state at the left endpoints s_0..s_{n-1}; V_next is the state of
// the problem started at s_1 on the same noise and is unused at j = 0.
struct ConditionalSample {
  ModelConfig config;
  ForwardCurve curve;
  double x = 0.0;
  long paths = 0;
  std::vector<double> V;
  std::vector<double> V_next;
  std::vector<double> dW;
  std::vector<double> dB;
  std::vector<double> terminal;
  std::vector<double> terminal_next;

  long steps() const noexcept { return curve.steps(); }
  double dt() const noexcept { return curve.dt(); }
  std::span<const double> v(long p) const { return row(V, p); }
  std::span<const double> v_next(long p) const { return row(V_next, p); }
  std::span<const double> dw(long p) const { return row(dW, p); }
  std::span<const double> db(long p) const { return row(dB, p); }

 private:
  std::span<const double> row(const std::vector<double>& a, long p) const {
    const auto n = static_cast<std::size_t>(steps());
    return std::span<const double>(a).subspan(static_cast<std::size_t>(p) * n, n);
  }
};

inline constexpr long kMinSubSteps = 8;

// Paths [first, first + count) of the conditional simulation.
ConditionalSample simulate_conditional(const ConditionalLaw& law, double x, const ForwardCurve& curve,
                                       const ModelConfig& config, long first, long count, std::uint64_t seed);
ConditionalSample simulate_conditional(double t, double x, const ForwardCurve& curve, const ModelConfig& config,
                                       long paths, std::uint64_t seed, int threads = 1);

// Euler terminal value for the sample's noise under a shifted state and
// shifted variance path (one shift per left endpoint).
double reprice_path(const ConditionalSample& sample, long p, double dx, std::span<const double> dv);

// Per-path integrands; the estimators below are their means.
std::vector<double> u_values(const ConditionalSample& sample, int order = 0);
std::vector<double> domega_values(const ConditionalSample& sample, const Direction& eta, bool mixed);
std::vector<double> d2omega_pathwise_values(const ConditionalSample& sample, const Direction& eta);
std::vector<double> d2omega_ibp_values(const ConditionalSample& sample, const Direction& eta);

Estimate u_hat(const ConditionalSample& sample);
Estimate du_dx_hat(const ConditionalSample& sample);
Estimate d2u_dx2_hat(const ConditionalSample& sample);
Estimate domega_u_hat(const ConditionalSample& sample, const Direction& eta);
Estimate domega_dx_u_hat(const ConditionalSample& sample, const Direction& eta);
// Exact second derivative of the discrete functional along eta.
Estimate d2omega_u_hat(const ConditionalSample& sample, const Direction& eta);
// Malliavin form: the stochastic-integral part of the second derivative is
// replaced by its integrated-by-parts expectation.
Estimate d2omega_u_ibp_hat(const ConditionalSample& sample, const Direction& eta);
Estimate d2omega_u_singular_hat(const ConditionalSample& sample);

struct ConsistencyRow {
  std::string name;
  Estimate estimator;
  Estimate bump;
  Estimate difference;
  double tolerance = 0.0;
  bool pass = false;
};

// Shared-noise central differences against every derivative estimator,
// along the continuous direction eta and along the kernel direction.
std::vector<ConsistencyRow> derivative_consistency(const ConditionalSample& sample, const Direction& eta,
                                                   double bump);

struct ResidualReport {
  Estimate residual;
  Estimate value;
  Estimate time_term;
  Estimate drift_term;
  Estimate diffusion_term;
  Estimate vol_of_vol_term;
  Estimate cross_term;
  long paths = 0;
};

ResidualReport ppde_residual(double t, double x, const ForwardCurve& curve, const ModelConfig& config, long paths,
                             double time_step, std::uint64_t seed, int threads = 1);

struct TelescopeOptions {
  long coarse_steps = 2;
  long lattice_steps = 16;
  long inner_steps = 16;
  long outer_paths = 2000;
  long inner_paths = 2000;
  std::uint64_t seed = 0;
  int threads = 1;
  // Cap on the total number of inner paths; 0 means unlimited.
  long inner_budget = 0;
};

struct TelescopeReport {
  Estimate lhs;
  Estimate rhs;
  Estimate difference;
  std::vector<Estimate> interval_terms;
  long outer_completed = 0;
  long outer_requested = 0;
  bool conclusive = true;
};

TelescopeReport telescopic_check(const ModelConfig& config, const TelescopeOptions& options);

}  // namespace roughlab
