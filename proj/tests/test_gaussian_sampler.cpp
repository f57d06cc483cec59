#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "roughlab/analytic_moments.hpp"
#include "roughlab/errors.hpp"
#include "roughlab/factor_io.hpp"
#include "roughlab/gaussian_sampler.hpp"
#include "roughlab/grid.hpp"
#include "roughlab/rng.hpp"

using namespace roughlab;

namespace {

// Cov(V_s, V_t) by double-exponential quadrature of the raw kernel product.
double reference_cov(double hurst, double s, double t) {
  const double a = hurst - 0.5;
  const double lo = std::min(s, t), hi = std::max(s, t);
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(
      [&](double r, double rc) {
        const double u = r > 0.5 * lo ? rc : lo - r;
        return std::pow(u, a) * std::pow(hi - lo + u, a);
      },
      0.0, lo, 1e-15);
}

double reference_cross(double hurst, double t, double a, double b) {
  if (a >= t) return 0.0;
  const double hp = hurst + 0.5;
  return (std::pow(t - a, hp) - std::pow(t - std::min(b, t), hp)) / hp;
}

}  // namespace

TEST(JointCovariance, BrownianSingleStep) {
  const JointGaussianSpec spec(0.5, UniformGrid(1.0, 1));
  const Eigen::MatrixXd cov = spec.covariance();
  EXPECT_NEAR(cov(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(cov(0, 1), 1.0, 1e-14);
  EXPECT_NEAR(cov(1, 0), 1.0, 1e-14);
  EXPECT_NEAR(cov(1, 1), 1.0, 1e-14);
}

TEST(JointCovariance, CrossBlockClosedForm) {
  const JointGaussianSpec spec(0.3, UniformGrid(1.0, 2));
  EXPECT_NEAR(spec.covariance()(1, 2), (1.0 - std::pow(0.5, 0.8)) / 0.8, 1e-14);
  EXPECT_EQ(spec.covariance()(0, 3), 0.0);
}

TEST(JointCovariance, BlocksMatchIndependentQuadrature) {
  for (double h : {0.1, 0.3}) {
    const long n = 8;
    const UniformGrid grid(1.0, n);
    const JointGaussianSpec spec(h, grid);
    const Eigen::MatrixXd cov = spec.covariance();
    for (long i = 1; i <= n; ++i) {
      for (long j = 1; j <= n; ++j) {
        const double ref = reference_cov(h, grid.node(i), grid.node(j));
        EXPECT_NEAR(cov(i - 1, j - 1), ref, 1e-11 * ref) << "H=" << h << " i=" << i << " j=" << j;
      }
      for (long j = 0; j < n; ++j) {
        EXPECT_NEAR(cov(i - 1, n + j), reference_cross(h, grid.node(i), grid.node(j), grid.node(j + 1)), 1e-13);
        EXPECT_NEAR(cov(n + i - 1, n + j), i - 1 == j ? grid.dt() : 0.0, 1e-15);
      }
      EXPECT_NEAR(cov(i - 1, i - 1), std::pow(grid.node(i), 2 * h) / (2 * h), 1e-12);
    }
    EXPECT_TRUE(cov.isApprox(cov.transpose(), 0.0));
  }
}

TEST(JointCovariance, FactorReconstructs) {
  for (double h : {0.05, 0.1, 0.3, 0.5}) {
    for (long n : {16L, 128L}) {
      const JointGaussianSpec spec(h, UniformGrid(1.0, n));
      EXPECT_LT(spec.reconstruction_error(), 1e-9) << "H=" << h << " N=" << n;
    }
  }
}

TEST(JointCovariance, JitterLadderAndFailure) {
  Eigen::MatrixXd singular(2, 2);
  singular << 1.0, 1.0, 1.0, 1.0;
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 2);
  const JitteredFactor f = factor_conditional_block(singular, zero, 1.0, 0.1, 1.0);
  EXPECT_GT(f.jitter, 0.0);
  EXPECT_LE(f.jitter, 1e-8);

  Eigen::MatrixXd negative = -Eigen::MatrixXd::Identity(2, 2);
  EXPECT_THROW(factor_conditional_block(negative, zero, 1.0, 0.1, 1.0), FactorizationError);
}

TEST(JointCovariance, RejectsBadHurst) {
  EXPECT_THROW(JointGaussianSpec(0.0, UniformGrid(1.0, 4)), DomainError);
  EXPECT_THROW(JointGaussianSpec(0.7, UniformGrid(1.0, 4)), DomainError);
  EXPECT_THROW(UniformGrid(1.0, 0), DomainError);
  EXPECT_THROW(UniformGrid(-1.0, 4), DomainError);
}

// Rebuild V from the documented stream layout with a dense factor.
TEST(Sampler, MatchesDenseFactorOnStreamLayout) {
  for (long n : {16L, 64L, 100L}) {
    const JointGaussianSpec spec(0.2, UniformGrid(1.0, n));
    const NoiseBundle bundle = sample_bundle(spec, -0.3, 5, 9);
    const Eigen::MatrixXd l = spec.factor();
    for (long p = 0; p < 5; ++p) {
      PathStream stream(9, static_cast<std::uint64_t>(p));
      Eigen::VectorXd z(2 * n), zbar(n);
      for (long i = 0; i < 2 * n; ++i) z[i] = stream.normal();
      for (long i = 0; i < n; ++i) zbar[i] = stream.normal();
      const Eigen::VectorXd x = l * z;
      for (long i = 0; i < n; ++i) {
        EXPECT_NEAR(bundle.dw(p)[i], x[i], 1e-13);
        EXPECT_NEAR(bundle.v(p)[i], x[n + i], 1e-11) << "N=" << n << " path " << p << " node " << i;
        EXPECT_NEAR(bundle.dwbar(p)[i], std::sqrt(spec.grid().dt()) * zbar[i], 1e-14);
      }
    }
  }
}

TEST(Sampler, SampleCovarianceWithinFourStandardErrors) {
  const long n = 16, paths = 200000;
  const JointGaussianSpec spec(0.1, UniformGrid(1.0, n));
  const NoiseBundle bundle = sample_bundle(spec, 0.0, paths, 31);
  const Eigen::MatrixXd cov = spec.covariance();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(2 * n, 2 * n), sum_sq = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Eigen::VectorXd x(2 * n);
  for (long p = 0; p < paths; ++p) {
    for (long i = 0; i < n; ++i) {
      x[i] = bundle.v(p)[i];
      x[n + i] = bundle.dw(p)[i];
    }
    const Eigen::MatrixXd outer = x * x.transpose();
    sum += outer;
    sum_sq += outer.cwiseProduct(outer);
  }
  double worst = 0.0;
  for (long i = 0; i < 2 * n; ++i) {
    for (long j = 0; j <= i; ++j) {
      const double mean = sum(i, j) / paths;
      const double se = std::sqrt((sum_sq(i, j) / paths - mean * mean) / paths);
      worst = std::max(worst, std::abs(mean - cov(i, j)) / se);
    }
  }
  EXPECT_LT(worst, 4.0);
}

TEST(Sampler, OddMomentsVanish) {
  const long n = 16, paths = 200000;
  const JointGaussianSpec spec(0.3, UniformGrid(1.0, n));
  const NoiseBundle bundle = sample_bundle(spec, 0.0, paths, 4);
  for (long i = 0; i < n; ++i) {
    double s1 = 0, s1sq = 0, s3 = 0, s3sq = 0;
    for (long p = 0; p < paths; ++p) {
      const double v = bundle.v(p)[i];
      s1 += v;
      s1sq += v * v;
      s3 += v * v * v;
      s3sq += v * v * v * v * v * v;
    }
    EXPECT_LT(std::abs(s1 / paths) / std::sqrt(s1sq / paths / paths), 4.0);
    EXPECT_LT(std::abs(s3 / paths) / std::sqrt(s3sq / paths / paths), 4.0);
  }
}

TEST(Sampler, ExponentialMomentAtHorizon) {
  const long paths = 200000;
  const JointGaussianSpec spec(0.3, UniformGrid(1.0, 16));
  const NoiseBundle bundle = sample_bundle(spec, 0.0, paths, 12);
  double s = 0, ss = 0;
  for (long p = 0; p < paths; ++p) {
    const double e = std::exp(0.5 * bundle.v(p)[15]);
    s += e;
    ss += e * e;
  }
  const double mean = s / paths;
  const double se = std::sqrt((ss / paths - mean * mean) / paths);
  EXPECT_NEAR(v_expmoment(0.3, 1.0, 0.5), std::exp(0.25 / 1.2), 1e-15);
  EXPECT_LT(std::abs(mean - std::exp(0.25 / 1.2)), 4.0 * se);
}

TEST(Sampler, CorrelationExtremes) {
  const JointGaussianSpec spec(0.3, UniformGrid(1.0, 8));
  const NoiseBundle one = sample_bundle(spec, 1.0, 100, 2);
  for (std::size_t k = 0; k < one.dB.size(); ++k) EXPECT_EQ(one.dB[k], one.dW[k]);

  const long paths = 100000;
  const NoiseBundle zero = sample_bundle(spec, 0.0, paths, 2);
  double sxy = 0, sxy2 = 0;
  for (long p = 0; p < paths; ++p) {
    const double xy = zero.dw(p)[3] * zero.db(p)[3];
    sxy += xy;
    sxy2 += xy * xy;
  }
  const double mean = sxy / paths;
  EXPECT_LT(std::abs(mean), 4.0 * std::sqrt((sxy2 / paths - mean * mean) / paths));
  EXPECT_THROW(sample_bundle(spec, 1.5, 10, 2), DomainError);
  EXPECT_THROW(sample_bundle(spec, 0.0, 0, 2), DomainError);
}

TEST(Sampler, DeterministicAcrossThreadsAndPrefixes) {
  const JointGaussianSpec spec(0.25, UniformGrid(1.0, 80));
  const NoiseBundle a = sample_bundle(spec, -0.5, 1300, 8, 1);
  const NoiseBundle b = sample_bundle(spec, -0.5, 1300, 8, 3);
  EXPECT_EQ(a.V, b.V);
  EXPECT_EQ(a.dB, b.dB);
  const NoiseBundle prefix = sample_bundle(spec, -0.5, 300, 8, 1);
  EXPECT_TRUE(std::equal(prefix.V.begin(), prefix.V.end(), a.V.begin()));
  const NoiseBundle other = sample_bundle(spec, -0.5, 300, 9, 1);
  EXPECT_NE(other.V, prefix.V);
}

TEST(LevelCoupling, AggregatesAndRestricts) {
  const LevelCoupling c(UniformGrid(1.0, 2), UniformGrid(1.0, 4));
  const double fine[] = {0.1, 0.2, 0.3, 0.4};
  double coarse[2];
  c.aggregate(fine, coarse);
  EXPECT_DOUBLE_EQ(coarse[0], 0.1 + 0.2);
  EXPECT_DOUBLE_EQ(coarse[1], 0.3 + 0.4);
  c.restrict_nodes(fine, coarse);
  EXPECT_EQ(coarse[0], 0.2);
  EXPECT_EQ(coarse[1], 0.4);

  const LevelCoupling same(UniformGrid(1.0, 4), UniformGrid(1.0, 4));
  double copy[4];
  same.aggregate(fine, copy);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(copy[i], fine[i]);
  EXPECT_THROW(LevelCoupling(UniformGrid(1.0, 3), UniformGrid(1.0, 4)), DomainError);
  EXPECT_THROW(LevelCoupling(UniformGrid(1.0, 2), UniformGrid(2.0, 4)), DomainError);
}

TEST(FactorDump, RoundTrip) {
  const JointGaussianSpec spec(0.3, UniformGrid(1.0, 6));
  const auto file = std::filesystem::temp_directory_path() / "roughlab_factor_roundtrip.bin";
  write_factor_dump(file, spec);
  std::ifstream raw(file, std::ios::binary);
  char magic[4];
  raw.read(magic, 4);
  EXPECT_EQ(std::string(magic, 4), "VLTC");
  const FactorDump dump = read_factor_dump(file);
  EXPECT_EQ(dump.version, kFactorFormatVersion);
  EXPECT_EQ(dump.steps, 6);
  EXPECT_EQ(dump.hurst, 0.3);
  EXPECT_EQ(dump.covariance, spec.covariance());
  EXPECT_EQ(dump.factor, spec.factor());
  std::filesystem::remove(file);
}

TEST(FactorDump, RejectsForeignFile) {
  const auto file = std::filesystem::temp_directory_path() / "roughlab_not_a_factor.bin";
  {
    std::ofstream out(file, std::ios::binary);
    out << "NOPE0000";
  }
  EXPECT_THROW(read_factor_dump(file), ConfigError);
  std::filesystem::remove(file);
}

TEST(PathCsv, OneRowPerPath) {
  const JointGaussianSpec spec(0.3, UniformGrid(1.0, 3));
  const NoiseBundle bundle = sample_bundle(spec, 0.0, 4, 1);
  std::ostringstream os;
  write_path_csv(os, bundle);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "V_1,V_2,V_3,dW_0,dW_1,dW_2");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 4);
}
