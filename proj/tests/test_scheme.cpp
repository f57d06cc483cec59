#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "roughlab/errors.hpp"
#include "roughlab/gaussian_sampler.hpp"
#include "roughlab/scheme.hpp"

using namespace roughlab;

namespace {

ModelConfig make_model(double hurst, VolSpec vol, double zeta = 0.0, double rho = -0.5) {
  ModelConfig c;
  c.hurst = hurst;
  c.vol = std::move(vol);
  c.zeta = zeta;
  c.rho = rho;
  return c;
}

// Direct transcription of the Euler recursion on one path.
double reference_euler(const ModelConfig& c, std::span<const double> v, std::span<const double> db, double dt) {
  double x = c.x0;
  for (std::size_t i = 0; i < db.size(); ++i) {
    const double state = i == 0 ? 0.0 : v[i - 1];
    const double p = c.vol(state);
    x += p * db[i] + c.zeta * p * p * dt;
  }
  return x;
}

}  // namespace

TEST(Euler, MatchesDirectRecursion) {
  const auto c = make_model(0.2, VolSpec::exponential(0.6), -0.5);
  const JointGaussianSpec spec(0.2, UniformGrid(1.0, 12));
  const NoiseBundle bundle = sample_bundle(spec, c.rho, 50, 3);
  const auto xt = euler_terminal(bundle, c);
  for (long p = 0; p < 50; ++p) {
    EXPECT_NEAR(xt[p], reference_euler(c, bundle.v(p), bundle.db(p), spec.grid().dt()), 1e-13);
  }
}

TEST(Euler, ConstantVolatilityTelescopes) {
  auto c = make_model(0.3, VolSpec::constant(0.4));
  c.x0 = 0.25;
  const JointGaussianSpec spec(0.3, UniformGrid(1.0, 10));
  const NoiseBundle bundle = sample_bundle(spec, c.rho, 20, 5);
  const auto xt = euler_terminal(bundle, c);
  for (long p = 0; p < 20; ++p) {
    const auto db = bundle.db(p);
    EXPECT_NEAR(xt[p], 0.25 + 0.4 * std::accumulate(db.begin(), db.end(), 0.0), 1e-14);
  }
}

TEST(Euler, SingleStep) {
  auto c = make_model(0.3, VolSpec::exponential(0.5), -0.5);
  c.x0 = 1.0;
  const JointGaussianSpec spec(0.3, UniformGrid(1.0, 1));
  const NoiseBundle bundle = sample_bundle(spec, c.rho, 10, 5);
  const auto xt = euler_terminal(bundle, c);
  for (long p = 0; p < 10; ++p) EXPECT_NEAR(xt[p], 1.0 + bundle.db(p)[0] - 0.5, 1e-15);
}

TEST(Euler, ExponentialMartingale) {
  const auto c = make_model(0.3, VolSpec::constant(0.3), -0.5);
  const long paths = 100000;
  const JointGaussianSpec spec(0.3, UniformGrid(1.0, 8));
  const auto xt = euler_terminal(sample_bundle(spec, c.rho, paths, 17), c);
  double s = 0, ss = 0;
  for (double x : xt) {
    s += std::exp(x);
    ss += std::exp(2 * x);
  }
  const double mean = s / paths;
  EXPECT_LT(std::abs(mean - 1.0), 4.0 * std::sqrt((ss / paths - mean * mean) / paths));
}

TEST(Euler, LinearityAndShift) {
  const JointGaussianSpec spec(0.2, UniformGrid(1.0, 16));
  const NoiseBundle bundle = sample_bundle(spec, -0.5, 30, 6);
  const auto base = euler_terminal(bundle, make_model(0.2, VolSpec::polynomial({0.2, 0.1, 0.05})));
  const auto scaled = euler_terminal(bundle, make_model(0.2, VolSpec::polynomial({0.6, 0.3, 0.15})));
  auto shifted_model = make_model(0.2, VolSpec::polynomial({0.2, 0.1, 0.05}));
  shifted_model.x0 = 1.5;
  const auto shifted = euler_terminal(bundle, shifted_model);
  for (long p = 0; p < 30; ++p) {
    EXPECT_NEAR(scaled[p], 3.0 * base[p], 1e-13);
    EXPECT_NEAR(shifted[p], base[p] + 1.5, 1e-13);
  }
}

TEST(Euler, RejectsMismatchedBundle) {
  const JointGaussianSpec spec(0.2, UniformGrid(1.0, 4));
  const NoiseBundle bundle = sample_bundle(spec, -0.5, 3, 6);
  EXPECT_THROW(euler_terminal(bundle, make_model(0.3, VolSpec::exponential(0.5))), DomainError);
  EXPECT_THROW(euler_terminal(bundle, make_model(0.2, VolSpec::exponential(0.5), 0.0, 0.4)), DomainError);
}

TEST(Coupling, CoarseLevelMatchesAggregatedBundle) {
  const auto c = make_model(0.3, VolSpec::exponential(0.5), -0.5);
  const long nf = 64, n = 8, paths = 40;
  const JointGaussianSpec fine(0.3, UniformGrid(1.0, nf));
  const TerminalSample s = coupled_terminals(c, fine, n, paths, 21);
  const NoiseBundle bundle = sample_bundle(fine, c.rho, paths, 21);
  const LevelCoupling coupling(UniformGrid(1.0, n), fine.grid());
  std::vector<double> v(n), db(n);
  for (long p = 0; p < paths; ++p) {
    coupling.restrict_nodes(bundle.v(p), v);
    coupling.aggregate(bundle.db(p), db);
    EXPECT_NEAR(s.coarse[p], reference_euler(c, v, db, 1.0 / n), 1e-13);
    EXPECT_NEAR(s.reference[p], reference_euler(c, bundle.v(p), bundle.db(p), 1.0 / nf), 1e-13);
  }
}

TEST(Coupling, EqualLevelsAndConstantVolatilityAgree) {
  const auto rough = make_model(0.3, VolSpec::exponential(0.5));
  const TerminalSample same = coupled_terminals(rough, 32, 32, 200, 4);
  EXPECT_EQ(same.coarse, same.reference);
  EXPECT_EQ(strong_error(same).rms, 0.0);

  const auto flat = make_model(0.3, VolSpec::constant(0.2));
  const TerminalSample exact = coupled_terminals(flat, 8, 128, 200, 4);
  for (std::size_t p = 0; p < exact.coarse.size(); ++p) EXPECT_NEAR(exact.coarse[p], exact.reference[p], 1e-14);
  EXPECT_LT(strong_error(exact).rms, 1e-14);
}

TEST(Coupling, RoughLevelsDiffer) {
  const TerminalSample s = coupled_terminals(make_model(0.3, VolSpec::exponential(0.5)), 16, 256, 10000, 4);
  const StrongError e = strong_error(s);
  EXPECT_GT(e.rms, 0.0);
  EXPECT_GT(e.ci, 0.0);
  EXPECT_LT(e.ci, e.rms);
}

TEST(Coupling, DeterministicReplay) {
  const auto c = make_model(0.2, VolSpec::exponential(0.5));
  const TerminalSample a = coupled_terminals(c, 8, 128, 700, 13, 1);
  const TerminalSample b = coupled_terminals(c, 8, 128, 700, 13, 2);
  EXPECT_EQ(a.coarse, b.coarse);
  EXPECT_EQ(a.reference, b.reference);
}

TEST(Coupling, Preconditions) {
  const auto c = make_model(0.2, VolSpec::exponential(0.5));
  EXPECT_THROW(coupled_terminals(c, 24, 128, 10, 1), DomainError);
  EXPECT_THROW(coupled_terminals(c, 256, 128, 10, 1), DomainError);
  const std::vector<double> few(50, 1.0);
  EXPECT_THROW(strong_error(few, few), DomainError);
}

TEST(StrongError, RmsOfKnownDifferences) {
  std::vector<double> coarse(400), reference(400, 0.0);
  for (std::size_t p = 0; p < coarse.size(); ++p) coarse[p] = p % 2 == 0 ? 0.3 : -0.3;
  const StrongError e = strong_error(coarse, reference);
  EXPECT_NEAR(e.rms, 0.3, 1e-15);
  EXPECT_NEAR(e.ci, 0.0, 1e-12);
  EXPECT_EQ(e.paths, 400);
}
