#include "roughlab/scheme.hpp"

#include <cmath>

#include "roughlab/errors.hpp"
#include "roughlab/stats.hpp"

namespace roughlab {

namespace {

void check_bundle(const NoiseBundle& bundle, const ModelConfig& config) {
  if (bundle.hurst != config.hurst) throw DomainError("bundle and model disagree on H");
  if (bundle.grid.horizon() != config.horizon) throw DomainError("bundle and model disagree on T");
  if (bundle.rho != config.rho) throw DomainError("bundle and model disagree on rho");
  const auto expected = static_cast<std::size_t>(bundle.paths * bundle.grid.steps());
  if (bundle.V.size() != expected || bundle.dB.size() != expected) {
    throw DomainError("bundle arrays have inconsistent dimensions");
  }
}

}  // namespace

MultiLevelEuler::MultiLevelEuler(const ModelConfig& config, long fine_steps, std::span<const long> levels)
    : config_(config), fine_steps_(fine_steps), levels_(levels.begin(), levels.end()) {
  config.validate();
  if (fine_steps < 1) throw DomainError("fine level must have at least one step");
  for (long n : levels_) {
    if (n < 1 || fine_steps % n != 0) {
      throw DomainError("coarse level " + std::to_string(n) + " does not divide the fine level");
    }
    ratios_.push_back(fine_steps / n);
  }
}

void MultiLevelEuler::evaluate(std::span<const double> v, std::span<const double> db, std::span<double> out,
                               std::vector<double>& scratch) const {
  const long nf = fine_steps_;
  if (static_cast<long>(v.size()) != nf || static_cast<long>(db.size()) != nf ||
      out.size() != outputs()) {
    throw DomainError("multi-level Euler input has wrong dimensions");
  }
  scratch.resize(static_cast<std::size_t>(nf));
  // psi at left endpoints t_0..t_{N_f-1}; V_{t_0} = 0.
  scratch[0] = config_.vol(0.0);
  config_.vol.psi_values(v.first(nf - 1), std::span<double>(scratch).subspan(1));

  const double zeta = config_.zeta;
  const double dt_fine = config_.horizon / static_cast<double>(nf);
  double x = config_.x0;
  for (long k = 0; k < nf; ++k) {
    const double p = scratch[k];
    x += p * db[k] + zeta * p * p * dt_fine;
  }
  out[levels_.size()] = x;

  for (std::size_t l = 0; l < levels_.size(); ++l) {
    const long m = ratios_[l];
    const long n = levels_[l];
    const double dt = config_.horizon / static_cast<double>(n);
    double xc = config_.x0;
    for (long i = 0; i < n; ++i) {
      double inc = 0.0;
      for (long k = i * m; k < (i + 1) * m; ++k) inc += db[k];
      const double p = scratch[i * m];
      xc += p * inc + zeta * p * p * dt;
    }
    out[l] = xc;
  }
}

std::vector<double> euler_terminal(const NoiseBundle& bundle, const ModelConfig& config) {
  config.validate();
  check_bundle(bundle, config);
  const long n = bundle.grid.steps();
  const MultiLevelEuler euler(config, n, {});
  std::vector<double> out(static_cast<std::size_t>(bundle.paths));
  std::vector<double> scratch;
  double terminal = 0.0;
  for (long p = 0; p < bundle.paths; ++p) {
    euler.evaluate(bundle.v(p), bundle.db(p), std::span<double>(&terminal, 1), scratch);
    out[p] = terminal;
  }
  return out;
}

std::vector<double> LevelTerminals::column(std::size_t slot) const {
  std::vector<double> out(static_cast<std::size_t>(paths));
  for (long p = 0; p < paths; ++p) out[p] = at(p, slot);
  return out;
}

LevelTerminals level_terminals(const ModelConfig& config, const JointGaussianSpec& fine,
                               std::span<const long> levels, long paths, std::uint64_t seed, int threads) {
  if (paths < 1) throw DomainError("path count must be at least 1");
  if (fine.hurst() != config.hurst || fine.grid().horizon() != config.horizon) {
    throw DomainError("fine covariance does not match the model");
  }
  const MultiLevelEuler euler(config, fine.steps(), levels);
  LevelTerminals table;
  table.levels.assign(levels.begin(), levels.end());
  table.fine_steps = fine.steps();
  table.paths = paths;
  const std::size_t width = euler.outputs();
  table.values.resize(static_cast<std::size_t>(paths) * width);
  const BundleSampler sampler(fine, config.rho, seed);
  std::vector<std::vector<double>> scratch(static_cast<std::size_t>(resolve_threads(threads)));
  sampler.for_each_block(paths, threads, [&](const NoiseBlock& blk, long, int worker) {
    for (long k = 0; k < blk.count; ++k) {
      const long p = blk.first + k;
      euler.evaluate(blk.v(k), blk.db(k), std::span<double>(table.values).subspan(p * width, width),
                     scratch[worker]);
    }
  });
  return table;
}

TerminalSample coupled_terminals(const ModelConfig& config, const JointGaussianSpec& fine, long steps,
                                 long paths, std::uint64_t seed, int threads) {
  if (steps > fine.steps()) throw DomainError("coarse level exceeds the fine level");
  const long levels[] = {steps};
  const LevelTerminals table = level_terminals(config, fine, levels, paths, seed, threads);
  TerminalSample sample;
  sample.coarse = table.column(0);
  sample.reference = table.column(1);
  sample.steps = steps;
  sample.fine_steps = fine.steps();
  sample.seed = seed;
  return sample;
}

TerminalSample coupled_terminals(const ModelConfig& config, long steps, long fine_steps, long paths,
                                 std::uint64_t seed, int threads) {
  config.validate();
  if (fine_steps < steps) throw DomainError("fine level must be at least the coarse level");
  const JointGaussianSpec fine(config.hurst, UniformGrid(config.horizon, fine_steps));
  return coupled_terminals(config, fine, steps, paths, seed, threads);
}

StrongError strong_error(std::span<const double> coarse, std::span<const double> reference) {
  if (coarse.size() != reference.size()) throw DomainError("strong error needs paired samples");
  const long m = static_cast<long>(coarse.size());
  if (m < kMinStrongPaths) throw DomainError("strong error needs at least 100 paths");
  std::vector<RunningStats> batch(kStrongBatches);
  RunningStats all;
  for (long p = 0; p < m; ++p) {
    const double d = reference[p] - coarse[p];
    const double sq = d * d;
    batch[static_cast<std::size_t>(p * kStrongBatches / m)].add(sq);
    all.add(sq);
  }
  RunningStats means;
  for (const auto& b : batch) means.add(b.mean());
  StrongError out;
  out.paths = m;
  const double mse = all.mean();
  out.rms = std::sqrt(mse);
  if (mse > 0.0) {
    const double se_mse = means.stddev() / std::sqrt(static_cast<double>(kStrongBatches));
    out.ci = student_t_quantile(0.975, kStrongBatches - 1) * se_mse / (2.0 * out.rms);
  }
  return out;
}

StrongError strong_error(const TerminalSample& sample) { return strong_error(sample.coarse, sample.reference); }

}  // namespace roughlab
