#include "roughlab/gaussian_sampler.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <mutex>

#include "roughlab/errors.hpp"
#include "roughlab/rng.hpp"

namespace roughlab {

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

constexpr long kFftThreshold = 64;

long next_pow2(long n) {
  long p = 1;
  while (p < n) p <<= 1;
  return p;
}

double condition_estimate(const Eigen::MatrixXd& m) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
  const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
  const double lo = d.minCoeff();
  return lo > 0.0 ? d.maxCoeff() / lo : std::numeric_limits<double>::infinity();
}

}  // namespace

JitteredFactor factor_conditional_block(const Eigen::MatrixXd& schur_unit, const Eigen::MatrixXd& product_unit,
                                        double scale, double dt, double mean_diag) {
  std::vector<double> ladder{0.0};
  for (int k = -14; k <= -8; ++k) ladder.push_back(std::pow(10.0, k) * mean_diag);
  Eigen::MatrixXd last;
  for (double jit : ladder) {
    Eigen::MatrixXd s = scale * schur_unit;
    if (jit > 0.0) {
      s += (scale * jit / (dt + jit)) * product_unit;
      s.diagonal().array() += jit;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() == Eigen::Success) return {llt.matrixL(), jit};
    last = std::move(s);
  }
  throw FactorizationError("covariance factorization failed at maximal jitter", condition_estimate(last));
}

JointGaussianSpec::JointGaussianSpec(double hurst, const UniformGrid& grid)
    : grid_(grid), kernel_(hurst) {
  const long n = grid.steps();
  const double h = grid.dt();
  const double scale = std::pow(h, 2.0 * hurst);

  unit_mass_.resize(n);
  for (long m = 1; m <= n; ++m) unit_mass_[m - 1] = unit_kernel_mass(kernel_, m);

  vv_ = grid_vv_covariance(kernel_, n, h);

  // Unit-scale Schur complement Cov(V) - C C^T / dt, accumulated panel by
  // panel from differences so that cancellation happens term-wise.
  Eigen::MatrixXd schur_unit(n, n);
  Eigen::MatrixXd product_unit(n, n);
  for (long d = 0; d < n; ++d) {
    double diff = 0.0;
    double prod = 0.0;
    for (long i = 1; i + d <= n; ++i) {
      const double mm = unit_mass_[i - 1] * unit_mass_[i - 1 + d];
      prod += mm;
      diff += kernel_.brownian() ? 0.0 : unit_panel_product(kernel_, i, d) - mm;
      schur_unit(i - 1, i - 1 + d) = schur_unit(i - 1 + d, i - 1) = diff;
      product_unit(i - 1, i - 1 + d) = product_unit(i - 1 + d, i - 1) = prod;
    }
  }

  const double mean_diag = (vv_.trace() + static_cast<double>(n) * h) / (2.0 * static_cast<double>(n));
  if (kernel_.brownian()) {
    // V is the running sum of dW; the conditional block is exactly zero.
    conditional_factor_ = Eigen::MatrixXd::Zero(n, n);
    jitter_ = 0.0;
  } else {
    JitteredFactor f = factor_conditional_block(schur_unit, product_unit, scale, h, mean_diag);
    conditional_factor_ = std::move(f.lower);
    jitter_ = f.jitter;
  }

  increment_scale_ = std::sqrt(h + jitter_);
  const double cross_scale = std::pow(h, kernel_.h_plus()) / increment_scale_;
  toeplitz_.resize(n);
  for (long d = 0; d < n; ++d) toeplitz_[d] = cross_scale * unit_mass_[d];
}

double JointGaussianSpec::cross(long i, long j) const noexcept {
  if (j >= i) return 0.0;
  return std::pow(grid_.dt(), kernel_.h_plus()) * unit_mass_[i - j - 1];
}

Eigen::MatrixXd JointGaussianSpec::covariance() const {
  const long n = steps();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  cov.topLeftCorner(n, n) = vv_;
  for (long i = 1; i <= n; ++i) {
    for (long j = 0; j < n; ++j) {
      cov(i - 1, n + j) = cov(n + j, i - 1) = cross(i, j);
    }
  }
  cov.bottomRightCorner(n, n).diagonal().setConstant(grid_.dt());
  return cov;
}

Eigen::MatrixXd JointGaussianSpec::factor() const {
  const long n = steps();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  l.topLeftCorner(n, n).diagonal().setConstant(increment_scale_);
  for (long r = 0; r < n; ++r) {
    for (long k = 0; k <= r; ++k) l(n + r, k) = toeplitz_[r - k];
  }
  l.bottomRightCorner(n, n) = conditional_factor_;
  return l;
}

double JointGaussianSpec::reconstruction_error() const {
  const long n = steps();
  const Eigen::MatrixXd l = factor();
  const Eigen::MatrixXd prod = l * l.transpose();
  Eigen::MatrixXd v_first(2 * n, 2 * n);
  // (dW, V) -> (V, dW)
  v_first.topLeftCorner(n, n) = prod.bottomRightCorner(n, n);
  v_first.topRightCorner(n, n) = prod.bottomLeftCorner(n, n);
  v_first.bottomLeftCorner(n, n) = prod.topRightCorner(n, n);
  v_first.bottomRightCorner(n, n) = prod.topLeftCorner(n, n);
  Eigen::MatrixXd target = covariance();
  target.diagonal().array() += jitter_;
  return (v_first - target).norm() / target.norm();
}

JointGaussianSpec build_joint_covariance(double hurst, const UniformGrid& grid) {
  return JointGaussianSpec(hurst, grid);
}

class SamplerWorkspace {
 public:
  SamplerWorkspace(long steps, long fft_length)
      : steps_(steps), fft_length_(fft_length) {
    const auto block = static_cast<std::size_t>(BundleSampler::kBlock);
    const auto n = static_cast<std::size_t>(steps);
    latent.resize(2 * n * block);
    latent_bar.resize(n * block);
    V.resize(n * block);
    dW.resize(n * block);
    dWbar.resize(n * block);
    dB.resize(n * block);
    if (fft_length_ > 0) {
      const int len = static_cast<int>(fft_length_);
      const int bins = len / 2 + 1;
      real_ = fftw_alloc_real(static_cast<std::size_t>(len));
      freq_ = fftw_alloc_complex(static_cast<std::size_t>(bins));
      std::lock_guard lock(fftw_planner_mutex());
      forward_ = fftw_plan_dft_r2c_1d(len, real_, freq_, FFTW_ESTIMATE);
      backward_ = fftw_plan_dft_c2r_1d(len, freq_, real_, FFTW_ESTIMATE);
    }
  }
  ~SamplerWorkspace() {
    if (fft_length_ > 0) {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(forward_);
      fftw_destroy_plan(backward_);
      fftw_free(real_);
      fftw_free(freq_);
    }
  }
  SamplerWorkspace(const SamplerWorkspace&) = delete;
  SamplerWorkspace& operator=(const SamplerWorkspace&) = delete;

  std::vector<double> latent;
  std::vector<double> latent_bar;
  std::vector<double> V, dW, dWbar, dB;

  long steps_;
  long fft_length_;
  double* real_ = nullptr;
  fftw_complex* freq_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

BundleSampler::BundleSampler(const JointGaussianSpec& spec, double rho, std::uint64_t seed)
    : spec_(spec), rho_(rho), rho_bar_(0.0), seed_(seed) {
  if (!(std::abs(rho) <= 1.0)) throw DomainError("correlation must satisfy |rho| <= 1");
  rho_bar_ = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  const long n = spec.steps();
  if (n >= kFftThreshold) {
    fft_length_ = next_pow2(2 * n);
    SamplerWorkspace probe(n, fft_length_);
    std::fill(probe.real_, probe.real_ + fft_length_, 0.0);
    const auto col = spec.toeplitz_column();
    std::copy(col.begin(), col.end(), probe.real_);
    fftw_execute(probe.forward_);
    const long bins = fft_length_ / 2 + 1;
    spectrum_.resize(bins);
    const double norm = 1.0 / static_cast<double>(fft_length_);
    for (long k = 0; k < bins; ++k) {
      spectrum_[k] = std::complex<double>(probe.freq_[k][0], probe.freq_[k][1]) * norm;
    }
  }
}

BundleSampler::~BundleSampler() = default;

void SamplerWorkspaceDeleter::operator()(SamplerWorkspace* ws) const noexcept { delete ws; }

SamplerWorkspacePtr BundleSampler::make_workspace() const {
  return SamplerWorkspacePtr(new SamplerWorkspace(spec_.steps(), fft_length_));
}

NoiseBlock BundleSampler::sample_block(long block, long count, SamplerWorkspace& ws) const {
  const long n = spec_.steps();
  const long width = kBlock;
  const long first = block * kBlock;
  if (count < 0 || count > kBlock) throw DomainError("block path count out of range");

  for (long c = 0; c < width; ++c) {
    PathStream stream(seed_, static_cast<std::uint64_t>(first + c));
    stream.fill(std::span<double>(ws.latent.data() + 2 * n * c, 2 * n));
    stream.fill(std::span<double>(ws.latent_bar.data() + n * c, n));
  }

  const double s = spec_.increment_scale();
  const double sqrt_dt = std::sqrt(spec_.grid().dt());
  for (long c = 0; c < width; ++c) {
    const double* zw = ws.latent.data() + 2 * n * c;
    double* dw = ws.dW.data() + n * c;
    for (long i = 0; i < n; ++i) dw[i] = s * zw[i];
  }

  Eigen::Map<Eigen::MatrixXd> v_block(ws.V.data(), n, width);
  if (!spec_.kernel().brownian()) {
    const Eigen::Map<const Eigen::MatrixXd, 0, Eigen::OuterStride<>> z_v(ws.latent.data() + n, n, width,
                                                                         Eigen::OuterStride<>(2 * n));
    v_block.noalias() = spec_.conditional_factor().triangularView<Eigen::Lower>() * z_v;
  } else {
    v_block.setZero();
  }

  const auto col = spec_.toeplitz_column();
  if (fft_length_ > 0) {
    const long len = fft_length_;
    const long bins = len / 2 + 1;
    double* real = ws.real_;
    fftw_complex* f = ws.freq_;
    for (long c = 0; c < width; ++c) {
      std::memcpy(real, ws.latent.data() + 2 * n * c, sizeof(double) * n);
      std::fill(real + n, real + len, 0.0);
      fftw_execute_dft_r2c(ws.forward_, real, f);
      for (long k = 0; k < bins; ++k) {
        const double re = f[k][0];
        const double im = f[k][1];
        const double sr = spectrum_[k].real();
        const double si = spectrum_[k].imag();
        f[k][0] = re * sr - im * si;
        f[k][1] = re * si + im * sr;
      }
      fftw_execute_dft_c2r(ws.backward_, f, real);
      double* v = ws.V.data() + n * c;
      for (long r = 0; r < n; ++r) v[r] += real[r];
    }
  } else {
    for (long c = 0; c < width; ++c) {
      const double* zw = ws.latent.data() + 2 * n * c;
      double* v = ws.V.data() + n * c;
      for (long r = 0; r < n; ++r) {
        double acc = 0.0;
        for (long k = 0; k <= r; ++k) acc += col[r - k] * zw[k];
        v[r] += acc;
      }
    }
  }

  for (long idx = 0; idx < n * width; ++idx) {
    ws.dWbar[idx] = sqrt_dt * ws.latent_bar[idx];
    ws.dB[idx] = rho_ * ws.dW[idx] + rho_bar_ * ws.dWbar[idx];
  }

  NoiseBlock view;
  view.first = first;
  view.count = count;
  view.steps = n;
  view.V = ws.V.data();
  view.dW = ws.dW.data();
  view.dWbar = ws.dWbar.data();
  view.dB = ws.dB.data();
  return view;
}

NoiseBundle sample_bundle(const JointGaussianSpec& spec, double rho, long paths, std::uint64_t seed,
                          int threads) {
  if (paths < 1) throw DomainError("path count must be at least 1");
  BundleSampler sampler(spec, rho, seed);
  const long n = spec.steps();
  NoiseBundle out{spec.grid(), spec.hurst(), rho, seed, paths, {}, {}, {}, {}};
  const auto total = static_cast<std::size_t>(paths * n);
  out.V.resize(total);
  out.dW.resize(total);
  out.dWbar.resize(total);
  out.dB.resize(total);
  sampler.for_each_block(paths, threads, [&](const NoiseBlock& blk, long, int) {
    const auto offset = static_cast<std::size_t>(blk.first * n);
    const auto len = static_cast<std::size_t>(blk.count * n);
    std::copy(blk.V, blk.V + len, out.V.begin() + offset);
    std::copy(blk.dW, blk.dW + len, out.dW.begin() + offset);
    std::copy(blk.dWbar, blk.dWbar + len, out.dWbar.begin() + offset);
    std::copy(blk.dB, blk.dB + len, out.dB.begin() + offset);
  });
  return out;
}

}  // namespace roughlab
