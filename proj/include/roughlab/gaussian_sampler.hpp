#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "roughlab/grid.hpp"
#include "roughlab/kernel.hpp"
#include "roughlab/parallel.hpp"

namespace roughlab {

// Exact joint law of (V_{t_1..t_N}, dW_0..dW_{N-1}) on a uniform grid.
//
// The covariance is reported in V-first block order. It is factorized in
// (dW, V) order, where the factor has the block form
//   [ s I        0   ]      s^2 = dt + jitter
//   [ C / s     L_S  ]      L_S L_S^T = Cov(V) + jitter I - C C^T / s^2
// and C = Cov(V, dW) is lower-triangular Toeplitz.
class JointGaussianSpec {
 public:
  JointGaussianSpec(double hurst, const UniformGrid& grid);

  const UniformGrid& grid() const noexcept { return grid_; }
  const KernelSpec& kernel() const noexcept { return kernel_; }
  double hurst() const noexcept { return kernel_.hurst(); }
  long steps() const noexcept { return grid_.steps(); }
  double jitter() const noexcept { return jitter_; }

  // Cov(V_{t_i}, V_{t_j}), i, j = 1..N, stored 0-based.
  const Eigen::MatrixXd& vv_block() const noexcept { return vv_; }
  // Cov(V_{t_i}, dW_j) for i = 1..N, j = 0..N-1.
  double cross(long i, long j) const noexcept;
  const Eigen::MatrixXd& conditional_factor() const noexcept { return conditional_factor_; }
  double increment_scale() const noexcept { return increment_scale_; }
  // Column of C / s: entry d is the coefficient of z_W[k] in V[k + d].
  std::span<const double> toeplitz_column() const noexcept { return toeplitz_; }

  // Dense (2N)x(2N) covariance, V-first order.
  Eigen::MatrixXd covariance() const;
  // Dense (2N)x(2N) lower-triangular factor, (dW, V) order.
  Eigen::MatrixXd factor() const;
  // Relative Frobenius mismatch between factor * factor^T (permuted back to
  // V-first order) and covariance + jitter I.
  double reconstruction_error() const;

 private:
  UniformGrid grid_;
  KernelSpec kernel_;
  double jitter_ = 0.0;
  Eigen::MatrixXd vv_;
  std::vector<double> unit_mass_;
  Eigen::MatrixXd conditional_factor_;
  double increment_scale_ = 0.0;
  std::vector<double> toeplitz_;
};

JointGaussianSpec build_joint_covariance(double hurst, const UniformGrid& grid);

struct JitteredFactor {
  Eigen::MatrixXd lower;
  double jitter = 0.0;
};

// Cholesky factor of  scale * schur_unit + (scale * j / (dt + j)) * product_unit + j I
// for the first j on the ladder 0, 1e-14 m, 1e-13 m, ..., 1e-8 m that succeeds,
// with m = mean_diag. This is the conditional V-block given the increments
// when the increment block is jittered by the same j.
JitteredFactor factor_conditional_block(const Eigen::MatrixXd& schur_unit, const Eigen::MatrixXd& product_unit,
                                        double scale, double dt, double mean_diag);

// Per-path arrays, path-major: entry (p, i) at p * steps + i.
struct NoiseBundle {
  UniformGrid grid;
  double hurst;
  double rho;
  std::uint64_t seed;
  long paths;
  std::vector<double> V;
  std::vector<double> dW;
  std::vector<double> dWbar;
  std::vector<double> dB;

  std::span<const double> v(long p) const { return row(V, p); }
  std::span<const double> dw(long p) const { return row(dW, p); }
  std::span<const double> dwbar(long p) const { return row(dWbar, p); }
  std::span<const double> db(long p) const { return row(dB, p); }

 private:
  std::span<const double> row(const std::vector<double>& a, long p) const {
    const auto n = static_cast<std::size_t>(grid.steps());
    return std::span<const double>(a).subspan(static_cast<std::size_t>(p) * n, n);
  }
};

// View of a contiguous range of sampled paths.
struct NoiseBlock {
  long first = 0;
  long count = 0;
  long steps = 0;
  const double* V = nullptr;
  const double* dW = nullptr;
  const double* dWbar = nullptr;
  const double* dB = nullptr;

  std::span<const double> v(long k) const { return {V + k * steps, static_cast<std::size_t>(steps)}; }
  std::span<const double> dw(long k) const { return {dW + k * steps, static_cast<std::size_t>(steps)}; }
  std::span<const double> dwbar(long k) const {
    return {dWbar + k * steps, static_cast<std::size_t>(steps)};
  }
  std::span<const double> db(long k) const { return {dB + k * steps, static_cast<std::size_t>(steps)}; }
};

class SamplerWorkspace;
struct SamplerWorkspaceDeleter {
  void operator()(SamplerWorkspace* ws) const noexcept;
};
using SamplerWorkspacePtr = std::unique_ptr<SamplerWorkspace, SamplerWorkspaceDeleter>;

// Streaming sampler. Path p always consumes, from its own stream, 2N normals
// in factor order (z_W then z_V) followed by N normals for dWbar, and paths
// are processed in fixed blocks, so output is independent of threading and
// of how the path range is split.
class BundleSampler {
 public:
  static constexpr long kBlock = 512;

  BundleSampler(const JointGaussianSpec& spec, double rho, std::uint64_t seed);
  ~BundleSampler();
  BundleSampler(const BundleSampler&) = delete;
  BundleSampler& operator=(const BundleSampler&) = delete;

  const JointGaussianSpec& spec() const noexcept { return spec_; }
  double rho() const noexcept { return rho_; }
  std::uint64_t seed() const noexcept { return seed_; }

  SamplerWorkspacePtr make_workspace() const;
  // Paths [block * kBlock, block * kBlock + count) with count <= kBlock.
  NoiseBlock sample_block(long block, long count, SamplerWorkspace& ws) const;

  // visit(block_view, block_index, worker) over all paths [0, paths).
  template <class Visit>
  void for_each_block(long paths, int threads, Visit&& visit) const {
    const long blocks = (paths + kBlock - 1) / kBlock;
    const int workers = std::max(1, std::min<int>(resolve_threads(threads), static_cast<int>(blocks)));
    std::vector<SamplerWorkspacePtr> spaces;
    for (int w = 0; w < workers; ++w) spaces.push_back(make_workspace());
    parallel_for(static_cast<std::size_t>(blocks), workers, [&](std::size_t b, int worker) {
      const long first = static_cast<long>(b) * kBlock;
      const long count = std::min(kBlock, paths - first);
      visit(sample_block(static_cast<long>(b), count, *spaces[worker]), static_cast<long>(b), worker);
    });
  }

 private:
  const JointGaussianSpec& spec_;
  double rho_;
  double rho_bar_;
  std::uint64_t seed_;
  long fft_length_ = 0;
  std::vector<std::complex<double>> spectrum_;
};

NoiseBundle sample_bundle(const JointGaussianSpec& spec, double rho, long paths, std::uint64_t seed,
                          int threads = 1);

}  // namespace roughlab
