#include "roughlab/rate_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "roughlab/analytic_moments.hpp"
#include "roughlab/errors.hpp"
#include "roughlab/gaussian_sampler.hpp"
#include "roughlab/rng.hpp"
#include "roughlab/scheme.hpp"
#include "roughlab/stats.hpp"

namespace roughlab {

namespace {

constexpr std::uint64_t kReplicationTag = 0x7265706cULL;

}  // namespace

RateEstimate regress_loglog(std::span<const RatePoint> points) {
  if (points.size() < 3) throw DomainError("regression needs at least three points");
  std::vector<RatePoint> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(), [](const RatePoint& a, const RatePoint& b) { return a.steps < b.steps; });
  double mx = 0.0, my = 0.0;
  for (const auto& p : sorted) {
    if (!(p.error > 0.0)) throw DomainError("regression needs strictly positive errors");
    if (p.steps < 1) throw DomainError("regression needs positive step counts");
    mx += std::log(static_cast<double>(p.steps));
    my += std::log(p.error);
  }
  const double n = static_cast<double>(sorted.size());
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : sorted) {
    const double dx = std::log(static_cast<double>(p.steps)) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(p.error) - my);
  }
  if (!(sxx > 0.0)) throw DomainError("regression needs distinct step counts");
  RateEstimate est;
  est.slope = sxy / sxx;
  est.intercept = my - est.slope * mx;
  double ssr = 0.0;
  for (const auto& p : sorted) {
    const double r = std::log(p.error) - (est.intercept + est.slope * std::log(static_cast<double>(p.steps)));
    ssr += r * r;
  }
  est.slope_stderr = std::sqrt(ssr / (n - 2.0) / sxx);
  est.points = std::move(sorted);
  return est;
}

std::vector<long> ExperimentPlan::sorted_levels() const {
  if (levels.empty()) throw DomainError("experiment needs at least one level");
  std::set<long> unique(levels.begin(), levels.end());
  if (unique.size() != levels.size()) throw DomainError("experiment levels must be distinct");
  if (*unique.begin() < 1) throw DomainError("experiment levels must be positive");
  return {unique.begin(), unique.end()};
}

void ExperimentPlan::validate_monte_carlo() const {
  config.validate();
  const auto lv = sorted_levels();
  if (fine_steps <= lv.back()) throw DomainError("fine level must exceed every coarse level");
  for (long n : lv) {
    if (fine_steps % n != 0) throw DomainError("fine level must be a multiple of every coarse level");
  }
  if (paths < 1) throw DomainError("path count must be at least 1");
  if (replications < 1) throw DomainError("replication count must be at least 1");
}

std::vector<LevelRow> case1_rows(const ExperimentPlan& plan) {
  plan.config.validate();
  std::vector<LevelRow> rows;
  for (long n : plan.sorted_levels()) {
    LevelRow row;
    row.steps = n;
    row.error = exact_weak_error_quadratic(plan.config, UniformGrid(plan.config.horizon, n));
    row.ci = 0.0;
    row.used = row.error != 0.0;
    rows.push_back(row);
  }
  return rows;
}

RateEstimate run_case1(const ExperimentPlan& plan) {
  const auto rows = case1_rows(plan);
  std::vector<RatePoint> points;
  bool all_zero = true;
  for (const auto& r : rows) {
    all_zero = all_zero && r.error == 0.0;
    points.push_back({r.steps, std::abs(r.error), 0.0});
  }
  if (all_zero) throw InconclusiveError(kDegenerateMessage);
  return regress_loglog(points);
}

std::vector<std::vector<LevelRow>> weak_error_tables(const ExperimentPlan& plan,
                                                     std::span<const PayoffSpec> payoffs) {
  plan.validate_monte_carlo();
  if (payoffs.empty()) throw DomainError("at least one payoff is required");
  const auto levels = plan.sorted_levels();
  const JointGaussianSpec fine(plan.config.hurst, UniformGrid(plan.config.horizon, plan.fine_steps));
  const MultiLevelEuler euler(plan.config, plan.fine_steps, levels);
  const std::size_t n_levels = levels.size();
  const std::size_t n_payoffs = payoffs.size();
  const std::size_t width = n_levels * n_payoffs;
  const long blocks = (plan.paths + BundleSampler::kBlock - 1) / BundleSampler::kBlock;
  const int workers = resolve_threads(plan.threads);

  // replicate_means[r][q * n_levels + l]
  std::vector<std::vector<double>> replicate_means;
  for (int r = 0; r < plan.replications; ++r) {
    const BundleSampler sampler(fine, plan.config.rho, derive_seed(plan.seed, r, kReplicationTag));
    std::vector<double> partial(static_cast<std::size_t>(blocks) * width, 0.0);
    std::vector<std::vector<double>> scratch(workers), terminals(workers, std::vector<double>(euler.outputs()));
    sampler.for_each_block(plan.paths, plan.threads, [&](const NoiseBlock& blk, long b, int w) {
      double* slot = partial.data() + static_cast<std::size_t>(b) * width;
      for (long k = 0; k < blk.count; ++k) {
        euler.evaluate(blk.v(k), blk.db(k), terminals[w], scratch[w]);
        const double x_fine = terminals[w][n_levels];
        for (std::size_t q = 0; q < n_payoffs; ++q) {
          const double ref = payoffs[q](x_fine);
          for (std::size_t l = 0; l < n_levels; ++l) slot[q * n_levels + l] += ref - payoffs[q](terminals[w][l]);
        }
      }
    });
    std::vector<double> means(width, 0.0);
    for (long b = 0; b < blocks; ++b) {
      for (std::size_t c = 0; c < width; ++c) means[c] += partial[static_cast<std::size_t>(b) * width + c];
    }
    for (double& m : means) m /= static_cast<double>(plan.paths);
    replicate_means.push_back(std::move(means));
  }

  const double t_factor = plan.replications > 1 ? student_t_quantile(0.975, plan.replications - 1) : 0.0;
  std::vector<std::vector<LevelRow>> tables(n_payoffs);
  for (std::size_t q = 0; q < n_payoffs; ++q) {
    for (std::size_t l = 0; l < n_levels; ++l) {
      RunningStats s;
      for (const auto& rm : replicate_means) s.add(rm[q * n_levels + l]);
      LevelRow row;
      row.steps = levels[l];
      row.error = s.mean();
      row.ci = plan.replications > 1 ? t_factor * s.stddev() / std::sqrt(static_cast<double>(plan.replications))
                                     : std::numeric_limits<double>::infinity();
      tables[q].push_back(row);
    }
  }
  return tables;
}

WeakRateReport gate_and_regress(std::vector<LevelRow> rows) {
  WeakRateReport report;
  std::vector<RatePoint> points;
  for (auto& r : rows) {
    r.used = std::abs(r.error) > kNoiseGate * r.ci && r.error != 0.0;
    if (r.used) points.push_back({r.steps, std::abs(r.error), r.ci});
  }
  report.rows = std::move(rows);
  if (points.size() < 3) {
    report.status = RateStatus::inconclusive;
    report.message = "inconclusive: fewer than three levels exceed the noise gate";
    return report;
  }
  report.estimate = regress_loglog(points);
  report.status = RateStatus::ok;
  report.message = "ok";
  return report;
}

WeakRateReport run_case2(const ExperimentPlan& plan) {
  const PayoffSpec payoffs[] = {plan.config.payoff};
  return gate_and_regress(weak_error_tables(plan, payoffs).front());
}

std::vector<LevelRow> strong_rows(const ExperimentPlan& plan) {
  plan.validate_monte_carlo();
  if (plan.config.vol.is_constant()) throw InconclusiveError(kDegenerateMessage);
  const auto levels = plan.sorted_levels();
  const JointGaussianSpec fine(plan.config.hurst, UniformGrid(plan.config.horizon, plan.fine_steps));
  const LevelTerminals table = level_terminals(plan.config, fine, levels, plan.paths, plan.seed, plan.threads);
  const auto reference = table.column(levels.size());
  std::vector<LevelRow> rows;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const auto coarse = table.column(l);
    const StrongError e = strong_error(coarse, reference);
    rows.push_back({levels[l], e.rms, e.ci, e.rms > 0.0});
  }
  return rows;
}

RateEstimate run_strong(const ExperimentPlan& plan) {
  const auto rows = strong_rows(plan);
  std::vector<RatePoint> points;
  for (const auto& r : rows) {
    if (r.used) points.push_back({r.steps, r.error, r.ci});
  }
  if (points.empty()) throw InconclusiveError(kDegenerateMessage);
  return regress_loglog(points);
}

}  // namespace roughlab
