#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <vector>

#include "roughlab/errors.hpp"
#include "roughlab/kernel.hpp"

using namespace roughlab;

namespace {

// Independent reference: double-exponential quadrature on the raw integrand.
constexpr double kRefTol = 1e-15;

// Distance from r to the upper limit b, using the complement supplied by the
// double-exponential rule where it is accurate.
double distance_to_upper(double r, double rc, double a, double b) {
  return r > 0.5 * (a + b) ? rc : b - r;
}

double brute_cov(double hurst, double s, double t) {
  const double a = hurst - 0.5;
  const double lo = std::min(s, t);
  const double hi = std::max(s, t);
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(
      [&](double r, double rc) {
        const double u = distance_to_upper(r, rc, 0.0, lo);
        return std::pow(u, a) * std::pow(hi - lo + u, a);
      },
      0.0, lo, kRefTol);
}

double brute_delta_k(double hurst, double t, double ti, double alpha) {
  const double a = hurst - 0.5;
  boost::math::quadrature::tanh_sinh<double> integrator;
  double past = 0.0;
  if (ti > 0.0) {
    past = integrator.integrate(
        [&](double r, double rc) {
          const double u = distance_to_upper(r, rc, 0.0, ti);
          return (std::pow(u, a) - std::pow(t - ti + u, a)) * std::pow(t - ti + u, alpha);
        },
        0.0, ti, kRefTol);
  }
  const double recent = integrator.integrate(
      [&](double r, double rc) { return std::pow(distance_to_upper(r, rc, ti, t), a + alpha); }, ti, t, kRefTol);
  return past + recent;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace

TEST(KernelSpec, RejectsHurstOutsideRange) {
  EXPECT_THROW(KernelSpec(0.0), DomainError);
  EXPECT_THROW(KernelSpec(0.51), DomainError);
  EXPECT_NO_THROW(KernelSpec(0.5));
}

TEST(KernelEval, Examples) {
  EXPECT_DOUBLE_EQ(k_eval(KernelSpec(0.5), 1.0, 0.3), 1.0);
  EXPECT_NEAR(k_eval(KernelSpec(0.25), 1.0, 0.75), std::sqrt(2.0), 1e-15);
  EXPECT_EQ(k_eval(KernelSpec(0.3), 0.5, 0.5), 0.0);
  EXPECT_EQ(k_eval(KernelSpec(0.3), 0.5, 0.9), 0.0);
}

TEST(KernelEval, NonIncreasingInSecondArgument) {
  for (double h : {0.05, 0.2, 0.4, 0.5}) {
    const KernelSpec k(h);
    double prev = k_eval(k, 1.0, 0.0);
    for (int i = 1; i < 200; ++i) {
      const double s = i / 200.0;
      const double cur = k_eval(k, 1.0, s);
      EXPECT_LE(prev, cur) << "kernel grows toward the diagonal";
      prev = cur;
    }
    EXPECT_EQ(k_eval(k, 1.0, 1.0), 0.0);
    EXPECT_EQ(k_eval(k, 1.0, 3.0), 0.0);
  }
}

TEST(KernelPrimitive, Examples) {
  EXPECT_DOUBLE_EQ(k_primitive(KernelSpec(0.5), 1.0, 0.0, 1.0), 1.0);
  EXPECT_NEAR(k_primitive(KernelSpec(0.25), 1.0, 0.0, 1.0), 4.0 / 3.0, 1e-15);
  EXPECT_EQ(k_primitive(KernelSpec(0.25), 0.5, 0.5, 1.0), 0.0);
  EXPECT_THROW(k_primitive(KernelSpec(0.25), 1.0, 0.6, 0.5), DomainError);
}

TEST(KernelPrimitive, MatchesQuadratureOfKernel) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  for (double h : {0.1, 0.3, 0.5}) {
    const KernelSpec k(h);
    for (double t : {0.5, 1.0, 2.0}) {
      for (double a : {0.0, 0.2 * t, 0.5 * t}) {
        for (double b : {0.6 * t, 0.9 * t, t}) {
          const double ref = integrator.integrate(
              [&](double r, double rc) { return std::pow(distance_to_upper(r, rc, a, b) + (t - b), k.exponent()); },
              a, b, kRefTol);
          EXPECT_NEAR(k_primitive(k, t, a, b), ref, 1e-10 * std::max(1.0, ref));
        }
      }
    }
  }
}

TEST(CovVV, Examples) {
  EXPECT_NEAR(cov_vv(KernelSpec(0.3), 1.0, 1.0), 1.0 / 0.6, 1e-15);
  EXPECT_NEAR(cov_vv(KernelSpec(0.5), 0.4, 1.0), 0.4, 1e-15);
  const double oracle = brute_cov(0.3, 0.5, 1.0);
  EXPECT_NEAR(oracle, 0.77015781782843674, 1e-10);
  EXPECT_NEAR(cov_vv(KernelSpec(0.3), 0.5, 1.0), 0.77015781782843674, 1e-12);
}

TEST(CovVV, SymmetricBoundedAndConsistentWithReference) {
  for (double h : {0.05, 0.1, 0.25, 0.4}) {
    const KernelSpec k(h);
    for (double s : {0.1, 0.5, 0.9, 1.0}) {
      for (double t : {0.1, 0.37, 1.0, 2.5}) {
        const double c = cov_vv(k, s, t);
        EXPECT_DOUBLE_EQ(c, cov_vv(k, t, s));
        const double lo = std::min(s, t);
        EXPECT_LE(c, std::pow(lo, 2 * h) / (2 * h) * (1 + 1e-14));
        if (s != t) EXPECT_NEAR(c, brute_cov(h, s, t), 1e-9 * std::max(1.0, c));
      }
    }
    EXPECT_DOUBLE_EQ(cov_vv(k, 0.7, 0.7), std::pow(0.7, 2 * h) / (2 * h));
    EXPECT_EQ(cov_vv(k, 0.0, 0.7), 0.0);
  }
}

TEST(CovVV, NearDiagonalPairs) {
  const KernelSpec k(0.1);
  for (double gap : {1e-8, 1e-5, 1e-3}) {
    const double c = cov_vv(k, 1.0, 1.0 + gap);
    EXPECT_NEAR(c, brute_cov(0.1, 1.0, 1.0 + gap), 1e-9);
    EXPECT_LT(c, cov_vv(k, 1.0, 1.0));
  }
}

TEST(GridCovariance, MatchesPairwiseCovariance) {
  for (double h : {0.1, 0.3, 0.5}) {
    const KernelSpec k(h);
    const long n = 24;
    const double dt = 1.5 / n;
    const Eigen::MatrixXd c = grid_vv_covariance(k, n, dt);
    for (long i = 1; i <= n; ++i) {
      for (long j = 1; j <= n; ++j) {
        EXPECT_NEAR(c(i - 1, j - 1), cov_vv(k, i * dt, j * dt), 1e-11);
      }
    }
  }
}

TEST(UnitPanelProduct, FirstPanelMatchesReference) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  for (double h : {0.05, 0.3}) {
    const KernelSpec k(h);
    const double a = h - 0.5;
    for (long m : {1L, 2L, 9L, 100L}) {
      for (long d : {0L, 1L, 5L}) {
        const double ref = integrator.integrate(
            [&](double u, double uc) {
              const double w = distance_to_upper(u, uc, 0.0, 1.0) + (m - 1);
              return std::pow(w, a) * std::pow(w + d, a);
            },
            0.0, 1.0, kRefTol);
        EXPECT_NEAR(unit_panel_product(k, m, d), ref, 1e-13);
      }
    }
  }
}

TEST(WeightedKernelIntegral, Examples) {
  EXPECT_NEAR(weighted_kernel_integral(KernelSpec(0.5), 1.0, 0.0), 1.0, 1e-14);
  EXPECT_NEAR(weighted_kernel_integral(KernelSpec(0.25), 1.0, 0.0), 4.0 / 3.0, 1e-13);
  const double oracle = beta_identity_rhs(KernelSpec(0.1), 2.0, 1.0);
  EXPECT_NEAR(oracle, 3.1577428468966627, 1e-14);
  EXPECT_NEAR(weighted_kernel_integral(KernelSpec(0.1), 2.0, 1.0) / oracle, 1.0, 1e-8);
  EXPECT_THROW(weighted_kernel_integral(KernelSpec(0.1), 1.0, -1.0), DomainError);
}

TEST(WeightedKernelIntegral, BetaIdentityOnGrid) {
  for (double h : {0.05, 0.1, 0.25, 0.4}) {
    for (double beta : {0.0, 0.5, 1.0, 2.0, -0.5}) {
      for (double t : {0.5, 1.0, 2.0}) {
        const KernelSpec k(h);
        const double oracle = beta_identity_rhs(k, t, beta);
        EXPECT_NEAR(weighted_kernel_integral(k, t, beta) / oracle, 1.0, 1e-8)
            << "H=" << h << " beta=" << beta << " t=" << t;
      }
    }
  }
}

TEST(BetaFunction, LogGammaRoute) {
  EXPECT_NEAR(beta_function(0.5, 0.5), M_PI, 1e-13);
  EXPECT_NEAR(beta_function(2.0, 3.0), 1.0 / 12.0, 1e-15);
  EXPECT_NEAR(beta_function(0.6, 2.0), 1.0 / (0.6 * 1.6), 1e-14);
}

TEST(DeltaKernel, Examples) {
  EXPECT_EQ(delta_k_weighted_integral(KernelSpec(0.2), 1.0, 1.0, 0.0), 0.0);
  EXPECT_NEAR(delta_k_weighted_integral(KernelSpec(0.5), 1.0, 0.9, 0.0), 0.1, 1e-14);
  EXPECT_THROW(delta_k_weighted_integral(KernelSpec(0.2), 1.0, 1.1, 0.0), DomainError);
  EXPECT_NEAR(delta_k_weighted_integral(KernelSpec(0.2), 1.0, 0.875, 0.0), 0.53897148161927877, 1e-12);
  EXPECT_NEAR(delta_k_weighted_integral(KernelSpec(0.1), 1.0, 0.5, 0.2), 1.2022822803898055, 1e-12);
}

TEST(DeltaKernel, MatchesReferenceAndIsPositive) {
  for (double h : {0.1, 0.2, 0.4}) {
    for (double alpha : {0.0, 2 * h, 1.0}) {
      for (double ti : {0.0, 0.3, 0.75, 0.99}) {
        const double v = delta_k_weighted_integral(KernelSpec(h), 1.0, ti, alpha);
        EXPECT_GT(v, 0.0);
        EXPECT_NEAR(v, brute_delta_k(h, 1.0, ti, alpha), 1e-9);
      }
    }
  }
}

TEST(DeltaKernel, SlopeForSmallExponent) {
  // With alpha = 0 the log-log slope against the gap is close to H + 1/2.
  const KernelSpec k(0.2);
  std::vector<double> x, y;
  for (int e = 3; e <= 8; ++e) {
    const double dt = std::ldexp(1.0, -e);
    x.push_back(std::log(dt));
    y.push_back(std::log(delta_k_weighted_integral(k, 1.0, 1.0 - dt, 0.0)));
  }
  EXPECT_NEAR(slope(x, y), 0.7, 0.05);
}
