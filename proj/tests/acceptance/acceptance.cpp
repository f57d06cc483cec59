#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "roughlab/analytic_moments.hpp"
#include "roughlab/gaussian_sampler.hpp"
#include "roughlab/kernel.hpp"
#include "roughlab/ppde.hpp"
#include "roughlab/rate_lab.hpp"
#include "roughlab/scheme.hpp"
#include "roughlab/stats.hpp"

using namespace roughlab;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += "[fail] ";
    }
    detail += what + "; ";
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Verdict()> run;
};

// ---------------------------------------------------------------------------

constexpr double kBetaRelTol = 1e-8;
constexpr double kCovAbsTol = 1e-10;

Verdict kernel_identities() {
  Verdict v;
  double worst = 0.0, worst_cov = 0.0;
  for (double h : {0.05, 0.1, 0.25, 0.4, 0.5}) {
    const KernelSpec k(h);
    for (double b : {0.0, 0.5, 1.0, 2.0}) {
      for (double t : {0.5, 1.0, 2.0}) {
        const double oracle = std::beta(h + 0.5, b + 1.0) * std::pow(t, b + h + 0.5);
        worst = std::max(worst, std::abs(weighted_kernel_integral(k, t, b) - oracle) / oracle);
      }
    }
    for (double t : {0.5, 1.0, 2.0}) {
      worst_cov = std::max(worst_cov, std::abs(cov_vv(k, t, t) - std::pow(t, 2 * h) / (2 * h)));
    }
  }
  v.check(worst <= kBetaRelTol, fmt("max Beta rel err %.2e <= %.0e", worst, kBetaRelTol));
  v.check(worst_cov <= kCovAbsTol, fmt("max cov_vv(t,t) err %.2e <= %.0e", worst_cov, kCovAbsTol));
  return v;
}

constexpr double kSlopeTol = 0.05;

Verdict delta_kernel_scaling() {
  Verdict v;
  for (double h : {0.1, 0.2, 0.4}) {
    const KernelSpec k(h);
    for (double alpha : {0.0, 2.0 * h}) {
      std::vector<RatePoint> pts;
      for (int e = 3; e <= 9; ++e) {
        const double dt = std::ldexp(1.0, -e);
        pts.push_back({1L << e, delta_k_weighted_integral(k, 1.0, 1.0 - dt, alpha), 0.0});
      }
      const double slope = -regress_loglog(pts).slope;
      const double expected = alpha + h + 0.5;
      v.check(std::abs(slope - expected) <= kSlopeTol,
              fmt("H=%.1f alpha=%.1f slope %.3f vs %.2f", h, alpha, slope, expected));
    }
  }
  return v;
}

constexpr double kMomentSe = 4.0;

Verdict sampler_moments() {
  Verdict v;
  const long paths = 200000;
  for (double h : {0.1, 0.3}) {
    const JointGaussianSpec spec(h, UniformGrid(1.0, 16));
    const NoiseBundle bundle = sample_bundle(spec, 0.0, paths, 20240601 + static_cast<int>(10 * h));
    double worst = 0.0;
    for (long i = 0; i < 16; ++i) {
      RunningStats sq, q4, ex;
      for (long p = 0; p < paths; ++p) {
        const double x = bundle.v(p)[i];
        sq.add(x * x);
        q4.add(x * x * x * x);
        ex.add(std::exp(0.5 * x));
      }
      const double t = spec.grid().node(i + 1);
      const auto z = [&](const RunningStats& s, double exact) {
        return std::abs(s.mean() - exact) / (s.stddev() / std::sqrt(static_cast<double>(paths)));
      };
      worst = std::max({worst, z(sq, v_variance(h, t)), z(q4, v_moment(h, t, 4)), z(ex, v_expmoment(h, t, 0.5))});
    }
    v.check(worst <= kMomentSe, fmt("H=%.1f worst deviation %.2f standard errors", h, worst));
  }
  return v;
}

constexpr double kCase1SlopeLow = -1.1, kCase1SlopeHigh = -0.85;
constexpr double kGeometricTol = 1e-10;

ModelConfig case_model(double h, double nu) {
  ModelConfig c;
  c.hurst = h;
  c.vol = VolSpec::exponential(nu);
  c.payoff = PayoffSpec::quadratic(1.0, 0.0, 0.0);
  return c;
}

Verdict case1_rate() {
  Verdict v;
  for (double h : {0.1, 0.3}) {
    ExperimentPlan plan;
    plan.config = case_model(h, 0.5);
    plan.levels = {8, 16, 32, 64, 128, 256, 512, 1024};
    const double slope = run_case1(plan).slope;
    v.check(slope >= kCase1SlopeLow && slope <= kCase1SlopeHigh, fmt("H=%.1f slope %.4f", h, slope));
  }
  // Brownian volatility: E[psi(W_s)^2] = exp(2 nu^2 s), so the error is an
  // integral minus a geometric sum.
  const double nu = 0.5, horizon = 1.0;
  const double c = 2 * nu * nu;
  double worst = 0.0;
  for (long n = 8; n <= 1024; n *= 2) {
    const double dt = horizon / n;
    const double closed = std::expm1(c * horizon) / c - dt * std::expm1(c * horizon) / std::expm1(c * dt);
    const double exact = exact_weak_error_quadratic(case_model(0.5, nu), UniformGrid(horizon, n));
    worst = std::max(worst, std::abs(closed - exact));
  }
  v.check(worst <= kGeometricTol, fmt("H=0.5 geometric sum gap %.2e", worst));
  return v;
}

constexpr double kStrongSlopeTol = 0.1;

Verdict strong_rate() {
  Verdict v;
  for (double h : {0.2, 0.4}) {
    ExperimentPlan plan;
    plan.config = case_model(h, 0.3);
    plan.config.rho = -0.5;
    plan.levels = {16, 32, 64, 128, 256, 512};
    plan.fine_steps = 4096;
    plan.paths = 10000;
    plan.seed = 77;
    const double slope = run_strong(plan).slope;
    v.check(std::abs(slope + h) <= kStrongSlopeTol, fmt("H=%.1f slope %.3f vs %.1f", h, slope, -h));
  }
  return v;
}

constexpr double kCase2Bound = -0.65;

Verdict case2_rate() {
  Verdict v;
  const double h = 0.2;
  ExperimentPlan plan;
  plan.config = case_model(h, 0.5);
  plan.config.rho = -0.7;
  plan.config.payoff = PayoffSpec::monomial(3);
  plan.seed = 2024;
  const PayoffSpec payoffs[] = {PayoffSpec::monomial(3), PayoffSpec::quadratic(1.0, 0.0, 0.0)};
  const auto tables = weak_error_tables(plan, payoffs);
  const WeakRateReport rep = gate_and_regress(tables[0]);
  if (rep.status != RateStatus::ok) {
    v.check(false, "cubic payoff " + rep.message);
  } else {
    const double bound = kCase2Bound;
    v.check(rep.estimate->slope <= bound, fmt("cubic slope %.3f <= %.2f", rep.estimate->slope, bound));
  }
  ModelConfig quad = plan.config;
  quad.payoff = payoffs[1];
  const double fine = exact_weak_error_quadratic(quad, UniformGrid(1.0, plan.fine_steps));
  for (const auto& row : tables[1]) {
    const double analytic = exact_weak_error_quadratic(quad, UniformGrid(1.0, row.steps)) - fine;
    v.check(std::abs(row.error - analytic) <= row.ci,
            fmt("quadratic N=%ld mc %.5f vs %.5f ci %.5f", row.steps, row.error, analytic, row.ci));
  }
  return v;
}

Verdict ppde_consistency() {
  Verdict v;
  for (double h : {0.3, 0.5}) {
    ModelConfig c;
    c.hurst = h;
    c.rho = -0.5;
    c.zeta = -0.5;
    c.vol = VolSpec::exponential(0.3);
    c.payoff = PayoffSpec::smooth_call(0.0, 0.2);
    const auto curve = ForwardCurve::from_function(0.2, 1.0, 32, [](double s) { return 0.1 * s - 0.05; });
    std::vector<double> eta(33);
    for (int j = 0; j <= 32; ++j) eta[j] = std::cos(3.0 * j / 32);
    const auto sample = simulate_conditional(0.2, 0.1, curve, c, 100000, 11);
    int passed = 0, total = 0;
    for (const auto& r : derivative_consistency(sample, Direction::nodal(eta), 1e-3)) {
      ++total;
      if (r.pass) {
        ++passed;
      } else {
        v.check(false, fmt("H=%.1f %s gap %.2e > %.2e", h, r.name.c_str(), std::abs(r.difference.mean),
                           r.tolerance));
      }
    }
    v.check(passed == total, fmt("H=%.1f %d/%d estimators consistent", h, passed, total));
  }
  return v;
}

constexpr double kResidualCi = 3.0;

Verdict ppde_residual_check() {
  Verdict v;
  const double t = 0.25, x = 0.1;
  const long steps = 64, paths = 200000;
  {
    ModelConfig c;
    c.hurst = 0.5;
    c.zeta = -0.5;
    const double sigma = 0.3;
    c.vol = VolSpec::constant(sigma);
    c.payoff = PayoffSpec::quadratic(1.0, 0.0, 0.0);
    const auto curve = ForwardCurve::constant(t, 1.0, steps, 0.0);
    const auto r = ppde_residual(t, x, curve, c, paths, curve.dt(), 5);
    const double tau = 1.0 - t;
    const double shifted = x - 0.5 * sigma * sigma * tau;
    const double closed = shifted * shifted + sigma * sigma * tau;
    v.check(std::abs(r.residual.mean) <= kResidualCi * r.residual.ci,
            fmt("Black-Scholes residual %.5f ci %.5f", r.residual.mean, r.residual.ci));
    v.check(std::abs(r.value.mean - closed) <= r.value.ci,
            fmt("Black-Scholes u %.6f vs %.6f ci %.6f", r.value.mean, closed, r.value.ci));
  }
  {
    ModelConfig c;
    c.hurst = 0.3;
    c.rho = -0.5;
    c.vol = VolSpec::exponential(0.3);
    c.payoff = PayoffSpec::smooth_call(0.0, 0.05);
    const auto curve = ForwardCurve::from_function(t, 1.0, steps, [](double s) { return 0.2 * (s - 0.25) - 0.1; });
    const auto r = ppde_residual(t, x, curve, c, paths, curve.dt(), 5);
    v.check(std::abs(r.residual.mean) <= kResidualCi * r.residual.ci,
            fmt("rough residual %.5f ci %.5f", r.residual.mean, r.residual.ci));
  }
  return v;
}

constexpr double kTelescopeCi = 3.0;

Verdict telescope() {
  Verdict v;
  ModelConfig c;
  c.hurst = 0.3;
  c.rho = -0.5;
  c.vol = VolSpec::exponential(0.3);
  c.payoff = PayoffSpec::quadratic(1.0, 0.0, 0.0);
  TelescopeOptions o;
  o.coarse_steps = 2;
  o.outer_paths = 2000;
  o.inner_paths = 2000;
  o.seed = 3;
  const TelescopeReport r = telescopic_check(c, o);
  v.check(r.conclusive, fmt("%ld/%ld outer paths", r.outer_completed, r.outer_requested));
  v.check(std::abs(r.difference.mean) <= kTelescopeCi * r.difference.ci,
          fmt("lhs %.5f rhs %.5f gap %.5f combined ci %.5f", r.lhs.mean, r.rhs.mean, r.difference.mean,
              r.difference.ci));
  return v;
}

Verdict rate_one_trick() {
  Verdict v;
  int violations = 0, checked = 0;
  for (double g : {0.2, 0.5, 1.0, 2.0}) {
    for (long n = 2; n <= 1024; ++n) {
      const RateOneCheck r = trick_rate_one_check(g, 1.0, n);
      ++checked;
      if (!(r.lhs <= r.bound)) ++violations;
    }
  }
  v.check(violations == 0, fmt("%d violations in %d cases", violations, checked));
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> only;
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "kernel identities", 10, kernel_identities},
      {2, "delta kernel scaling", 30, delta_kernel_scaling},
      {3, "exact sampler moments", 120, sampler_moments},
      {4, "case 1 weak rate", 10, case1_rate},
      {5, "strong rate", 600, strong_rate},
      {6, "case 2 weak rate", 1200, case2_rate},
      {7, "PPDE derivative consistency", 300, ppde_consistency},
      {8, "PPDE residual", 600, ppde_residual_check},
      {9, "telescopic decomposition", 600, telescope},
      {10, "rate-one trick", 1, rate_one_trick},
  };
  bool all = true;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.check(false, std::string("exception: ") + e.what());
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    v.check(elapsed < c.budget_seconds, fmt("%.1fs within %.0fs", elapsed, c.budget_seconds));
    all = all && v.pass;
    std::printf("criterion %2d %s: %s | %s\n", c.id, v.pass ? "PASS" : "FAIL", c.name, v.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
