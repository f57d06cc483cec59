#include "roughlab/ppde.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "roughlab/errors.hpp"
#include "roughlab/grid.hpp"
#include "roughlab/parallel.hpp"

namespace roughlab {

namespace {

constexpr long kChunk = 8192;
constexpr std::uint64_t kOuterTag = 0x6f75746572ULL;
constexpr std::uint64_t kInnerTag = 0x696e6e6572ULL;

bool close_to(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw DomainError(std::string(what) + " must be finite");
  }
}

// Euler drift-plus-diffusion increment sum over the left endpoints from `begin`.
double euler_sum(const VolSpec& vol, double zeta, double dt, std::span<const double> v, std::span<const double> db,
                 long begin) {
  double acc = 0.0;
  for (std::size_t j = static_cast<std::size_t>(begin); j < v.size(); ++j) {
    const double psi = vol.psi(0, v[j]);
    acc += zeta * psi * psi * dt + psi * db[j];
  }
  return acc;
}

// sum_j eta_j (psi'(V_j) dB_j + zeta (psi^2)'(V_j) dt)
double weight(const ConditionalSample& s, long p, std::span<const double> eta) {
  const auto v = s.v(p);
  const auto db = s.db(p);
  const double h = s.dt();
  double acc = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (eta[j] == 0.0) continue;
    acc += eta[j] * (s.config.vol.psi(1, v[j]) * db[j] + s.config.zeta * s.config.vol.psi_sq(1, v[j]) * h);
  }
  return acc;
}

double d2omega_pathwise(const ConditionalSample& s, long p, std::span<const double> eta) {
  const auto v = s.v(p);
  const auto db = s.db(p);
  const double h = s.dt();
  const double xt = s.terminal[p];
  const double a = weight(s, p, eta);
  double second = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double e2 = eta[j] * eta[j];
    if (e2 == 0.0) continue;
    second += e2 * (s.config.vol.psi(2, v[j]) * db[j] + s.config.zeta * s.config.vol.psi_sq(2, v[j]) * h);
  }
  return s.config.payoff.phi(2, xt) * a * a + s.config.payoff.phi(1, xt) * second;
}

double d2omega_ibp(const ConditionalSample& s, long p, std::span<const double> eta, std::span<const double> ktilde,
                   std::vector<double>& scratch) {
  const auto v = s.v(p);
  const auto db = s.db(p);
  const long n = s.steps();
  const double h = s.dt();
  const double xt = s.terminal[p];
  const double zeta = s.config.zeta;
  const double rho = s.config.rho;
  const VolSpec& vol = s.config.vol;
  scratch.resize(static_cast<std::size_t>(n));
  double a = 0.0;
  for (long k = 0; k < n; ++k) {
    scratch[k] = vol.psi(1, v[k]) * db[k] + zeta * vol.psi_sq(1, v[k]) * h;
    a += eta[k] * scratch[k];
  }
  const double phi1 = s.config.payoff.phi(1, xt);
  const double phi2 = s.config.payoff.phi(2, xt);
  double second = 0.0;
  for (long j = 0; j < n; ++j) {
    const double e2 = eta[j] * eta[j];
    if (e2 == 0.0) continue;
    double carried = 0.0;
    for (long k = j + 1; k < n; ++k) carried += ktilde[k - j] * scratch[k];
    second += h * e2 *
              (phi2 * (vol.psi(0, v[j]) + rho * carried) * vol.psi(2, v[j]) + zeta * phi1 * vol.psi_sq(2, v[j]));
  }
  return phi2 * a * a + second;
}

std::vector<double> eta_for(const ConditionalSample& s, const Direction& eta) {
  if (s.steps() == 0) return {};
  return eta.left_endpoints(KernelSpec(s.config.hurst), s.dt(), s.steps());
}

void fill_paths(const ConditionalLaw& law, double x, const ForwardCurve& curve, const ModelConfig& config,
                std::uint64_t seed, long first, long count, ConditionalSample& out, long offset) {
  const long n = law.steps();
  const double h = law.dt();
  const double rho_bar = config.rho_bar();
  std::vector<double> inc(n), inc_next(n), dwbar(n), scratch;
  const auto w = curve.values();
  for (long i = 0; i < count; ++i) {
    PathStream stream(seed, static_cast<std::uint64_t>(first + i));
    const auto base = static_cast<std::size_t>((offset + i) * n);
    std::span<double> v(out.V.data() + base, n);
    std::span<double> vn(out.V_next.data() + base, n);
    std::span<double> dw(out.dW.data() + base, n);
    std::span<double> db(out.dB.data() + base, n);
    law.draw(stream, inc, inc_next, dw, dwbar, scratch);
    for (long j = 0; j < n; ++j) {
      v[j] = w[j] + inc[j];
      vn[j] = w[j] + inc_next[j];
      db[j] = config.rho * dw[j] + rho_bar * dwbar[j];
    }
    out.terminal[offset + i] = x + euler_sum(config.vol, config.zeta, h, v, db, 0);
    out.terminal_next[offset + i] = x + euler_sum(config.vol, config.zeta, h, vn, db, 1);
  }
}

ConditionalSample empty_sample(double x, const ForwardCurve& curve, const ModelConfig& config, long paths) {
  ConditionalSample s{config, curve, x, paths, {}, {}, {}, {}, {}, {}};
  const auto total = static_cast<std::size_t>(paths * curve.steps());
  s.V.resize(total);
  s.V_next.resize(total);
  s.dW.resize(total);
  s.dB.resize(total);
  s.terminal.assign(static_cast<std::size_t>(paths), x);
  s.terminal_next.assign(static_cast<std::size_t>(paths), x);
  return s;
}

void check_curve(const ForwardCurve& curve, const ModelConfig& config) {
  config.validate();
  if (!close_to(curve.horizon(), config.horizon)) throw DomainError("forward curve must end at the model horizon");
}

}  // namespace

ForwardCurve::ForwardCurve(double anchor, double horizon, std::vector<double> values)
    : anchor_(anchor), horizon_(horizon), values_(std::move(values)) {
  if (!std::isfinite(anchor) || !std::isfinite(horizon) || anchor < 0.0 || anchor > horizon) {
    throw DomainError("forward curve needs 0 <= anchor <= horizon");
  }
  if (values_.empty()) throw DomainError("forward curve needs at least one value");
  if (anchor == horizon && values_.size() != 1) throw DomainError("forward curve at the horizon has one value");
  if (anchor < horizon && values_.size() < 2) throw DomainError("forward curve needs at least one step");
  require_finite(values_, "forward curve values");
}

ForwardCurve ForwardCurve::constant(double anchor, double horizon, long steps, double value) {
  if (steps < 0) throw DomainError("steps must be non-negative");
  return ForwardCurve(anchor, horizon, std::vector<double>(static_cast<std::size_t>(steps + 1), value));
}

ForwardCurve ForwardCurve::from_function(double anchor, double horizon, long steps,
                                         const std::function<double(double)>& f) {
  if (steps < 0) throw DomainError("steps must be non-negative");
  std::vector<double> v(static_cast<std::size_t>(steps + 1));
  for (long j = 0; j <= steps; ++j) {
    v[j] = f(steps == 0 ? anchor : anchor + (horizon - anchor) * static_cast<double>(j) / static_cast<double>(steps));
  }
  return ForwardCurve(anchor, horizon, std::move(v));
}

ForwardCurve ForwardCurve::interpolate(double anchor, double horizon, long steps, std::span<const double> s,
                                       std::span<const double> w) {
  if (s.empty() || s.size() != w.size()) throw DomainError("curve knots need matching non-empty columns");
  for (std::size_t k = 1; k < s.size(); ++k) {
    if (!(s[k] > s[k - 1])) throw DomainError("curve knots must be strictly increasing");
  }
  require_finite(w, "curve knot values");
  return from_function(anchor, horizon, steps, [&](double at) {
    if (at <= s.front()) return w.front();
    if (at >= s.back()) return w.back();
    const auto hi = static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), at) - s.begin());
    const double lam = (at - s[hi - 1]) / (s[hi] - s[hi - 1]);
    return (1.0 - lam) * w[hi - 1] + lam * w[hi];
  });
}

double ForwardCurve::dt() const noexcept {
  return steps() == 0 ? 0.0 : (horizon_ - anchor_) / static_cast<double>(steps());
}

double ForwardCurve::node(long j) const noexcept {
  if (j == steps()) return horizon_;
  return anchor_ + (horizon_ - anchor_) * static_cast<double>(j) / static_cast<double>(steps());
}

ForwardCurve ForwardCurve::advanced() const {
  if (steps() == 0) throw DomainError("curve at the horizon cannot be advanced");
  return ForwardCurve(node(1), horizon_, std::vector<double>(values_.begin() + 1, values_.end()));
}

Direction Direction::nodal(std::vector<double> values) {
  require_finite(values, "direction values");
  Direction d;
  d.singular_ = false;
  d.values_ = std::move(values);
  return d;
}

std::vector<double> Direction::left_endpoints(const KernelSpec& kernel, double dt, long steps) const {
  if (singular_) return kernel_cell_averages(kernel, dt, steps);
  if (static_cast<long>(values_.size()) < steps) throw DomainError("direction has fewer values than sub-grid steps");
  return std::vector<double>(values_.begin(), values_.begin() + steps);
}

std::vector<double> kernel_cell_averages(const KernelSpec& kernel, double dt, long steps) {
  std::vector<double> out(static_cast<std::size_t>(std::max(steps, 0L)), 0.0);
  const double scale = std::pow(dt, kernel.exponent());
  for (long m = 1; m < steps; ++m) out[m] = scale * unit_kernel_mass(kernel, m);
  return out;
}

ConditionalLaw::ConditionalLaw(double hurst, double anchor, double horizon, long steps)
    : kernel_(hurst), anchor_(anchor), horizon_(horizon), steps_(steps) {
  if (steps < 1) throw DomainError("conditional law needs at least one step");
  if (!(horizon > anchor)) throw DomainError("conditional law needs anchor < horizon");
  dt_ = (horizon - anchor) / static_cast<double>(steps);
  const long n = steps;
  const long m = n - 1;
  const double h = dt_;

  std::vector<double> mass(static_cast<std::size_t>(n));
  for (long j = 1; j < n; ++j) mass[j] = unit_kernel_mass(kernel_, j);

  double jitter = 0.0;
  Eigen::MatrixXd lower = Eigen::MatrixXd::Zero(m, m);
  if (m > 0 && !kernel_.brownian()) {
    Eigen::MatrixXd schur(m, m), product(m, m);
    double diag = 0.0;
    for (long j = 1; j <= m; ++j) {
      for (long k = j; k <= m; ++k) {
        const double mm = mass[j] * mass[k];
        schur(j - 1, k - 1) = schur(k - 1, j - 1) = unit_panel_product(kernel_, j, k - j) - mm;
        product(j - 1, k - 1) = product(k - 1, j - 1) = mm;
      }
      diag += unit_panel_product(kernel_, j, 0);
    }
    const double scale = std::pow(h, 2.0 * hurst);
    const double mean_diag = 0.5 * (scale * diag / static_cast<double>(m) + h);
    JitteredFactor f = factor_conditional_block(schur, product, scale, h, mean_diag);
    lower = std::move(f.lower);
    jitter = f.jitter;
  }
  first_scale_ = std::sqrt(h + jitter);
  first_factor_ = Eigen::MatrixXd::Zero(n, n);
  first_factor_(0, 0) = first_scale_;
  const double cross = std::pow(h, kernel_.h_plus()) / first_scale_;
  for (long j = 1; j < n; ++j) first_factor_(j, 0) = cross * mass[j];
  if (m > 0) first_factor_.bottomRightCorner(m, m) = lower;

  if (m > 0) {
    JointGaussianSpec rest(hurst, UniformGrid(h * static_cast<double>(m), m));
    rest_factor_ = rest.factor();
  }
}

void ConditionalLaw::draw(PathStream& stream, std::span<double> increment, std::span<double> increment_next,
                          std::span<double> dw, std::span<double> dwbar, std::vector<double>& scratch) const {
  const long n = steps_;
  const long m = n - 1;
  scratch.resize(static_cast<std::size_t>(2 * n + 4 * m));
  Eigen::Map<Eigen::VectorXd> z_first(scratch.data(), n);
  Eigen::Map<Eigen::VectorXd> y_first(scratch.data() + n, n);
  stream.fill(std::span<double>(scratch.data(), n));
  y_first.noalias() = first_factor_.triangularView<Eigen::Lower>() * z_first;
  dw[0] = y_first[0];
  increment[0] = 0.0;
  increment_next[0] = 0.0;
  for (long j = 1; j < n; ++j) increment[j] = y_first[j];
  if (m > 0) {
    Eigen::Map<Eigen::VectorXd> z_rest(scratch.data() + 2 * n, 2 * m);
    Eigen::Map<Eigen::VectorXd> y_rest(scratch.data() + 2 * n + 2 * m, 2 * m);
    stream.fill(std::span<double>(scratch.data() + 2 * n, 2 * m));
    y_rest.noalias() = rest_factor_.triangularView<Eigen::Lower>() * z_rest;
    for (long k = 0; k < m; ++k) dw[k + 1] = y_rest[k];
    increment_next[1] = 0.0;
    for (long j = 2; j < n; ++j) {
      increment_next[j] = y_rest[m + j - 2];
      increment[j] += increment_next[j];
    }
  }
  const double sqrt_dt = std::sqrt(dt_);
  for (long j = 0; j < n; ++j) dwbar[j] = sqrt_dt * stream.normal();
}

ConditionalSample simulate_conditional(const ConditionalLaw& law, double x, const ForwardCurve& curve,
                                       const ModelConfig& config, long first, long count, std::uint64_t seed) {
  check_curve(curve, config);
  if (law.steps() < kMinSubSteps) throw DomainError("sub-grid needs at least 8 steps");
  if (curve.steps() != law.steps() || !close_to(curve.anchor(), law.anchor()) ||
      !close_to(curve.horizon(), law.horizon())) {
    throw DomainError("forward curve does not match the conditional law sub-grid");
  }
  if (!(config.hurst == law.kernel().hurst())) throw DomainError("conditional law built for another H");
  if (first < 0 || count < 1) throw DomainError("path range must be non-empty");
  if (!std::isfinite(x)) throw DomainError("x must be finite");
  ConditionalSample s = empty_sample(x, curve, config, count);
  fill_paths(law, x, curve, config, seed, first, count, s, 0);
  return s;
}

ConditionalSample simulate_conditional(double t, double x, const ForwardCurve& curve, const ModelConfig& config,
                                       long paths, std::uint64_t seed, int threads) {
  check_curve(curve, config);
  if (!close_to(curve.anchor(), t)) throw DomainError("forward curve must start at t");
  if (paths < 1) throw DomainError("path count must be at least 1");
  if (!std::isfinite(x)) throw DomainError("x must be finite");
  if (curve.steps() == 0) return empty_sample(x, curve, config, paths);
  if (curve.steps() < kMinSubSteps) throw DomainError("sub-grid needs at least 8 steps");
  const ConditionalLaw law(config.hurst, curve.anchor(), config.horizon, curve.steps());
  ConditionalSample s = empty_sample(x, curve, config, paths);
  const long chunks = (paths + kChunk - 1) / kChunk;
  parallel_for(static_cast<std::size_t>(chunks), threads, [&](std::size_t c, int) {
    const long first = static_cast<long>(c) * kChunk;
    fill_paths(law, x, curve, config, seed, first, std::min(kChunk, paths - first), s, first);
  });
  return s;
}

double reprice_path(const ConditionalSample& sample, long p, double dx, std::span<const double> dv) {
  const auto v = sample.v(p);
  const auto db = sample.db(p);
  const double h = sample.dt();
  double acc = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double psi = sample.config.vol.psi(0, v[j] + dv[j]);
    acc += sample.config.zeta * psi * psi * h + psi * db[j];
  }
  return sample.x + dx + acc;
}

std::vector<double> u_values(const ConditionalSample& sample, int order) {
  std::vector<double> out(static_cast<std::size_t>(sample.paths));
  for (long p = 0; p < sample.paths; ++p) out[p] = sample.config.payoff.phi(order, sample.terminal[p]);
  return out;
}

std::vector<double> domega_values(const ConditionalSample& sample, const Direction& eta, bool mixed) {
  const auto e = eta_for(sample, eta);
  std::vector<double> out(static_cast<std::size_t>(sample.paths), 0.0);
  if (sample.steps() == 0) return out;
  for (long p = 0; p < sample.paths; ++p) {
    out[p] = sample.config.payoff.phi(mixed ? 2 : 1, sample.terminal[p]) * weight(sample, p, e);
  }
  return out;
}

std::vector<double> d2omega_pathwise_values(const ConditionalSample& sample, const Direction& eta) {
  const auto e = eta_for(sample, eta);
  std::vector<double> out(static_cast<std::size_t>(sample.paths), 0.0);
  if (sample.steps() == 0) return out;
  for (long p = 0; p < sample.paths; ++p) out[p] = d2omega_pathwise(sample, p, e);
  return out;
}

std::vector<double> d2omega_ibp_values(const ConditionalSample& sample, const Direction& eta) {
  const auto e = eta_for(sample, eta);
  std::vector<double> out(static_cast<std::size_t>(sample.paths), 0.0);
  if (sample.steps() == 0) return out;
  const auto kt = kernel_cell_averages(KernelSpec(sample.config.hurst), sample.dt(), sample.steps());
  std::vector<double> scratch;
  for (long p = 0; p < sample.paths; ++p) out[p] = d2omega_ibp(sample, p, e, kt, scratch);
  return out;
}

Estimate u_hat(const ConditionalSample& sample) { return summarize(u_values(sample, 0)); }
Estimate du_dx_hat(const ConditionalSample& sample) { return summarize(u_values(sample, 1)); }
Estimate d2u_dx2_hat(const ConditionalSample& sample) { return summarize(u_values(sample, 2)); }

Estimate domega_u_hat(const ConditionalSample& sample, const Direction& eta) {
  return summarize(domega_values(sample, eta, false));
}

Estimate domega_dx_u_hat(const ConditionalSample& sample, const Direction& eta) {
  return summarize(domega_values(sample, eta, true));
}

Estimate d2omega_u_hat(const ConditionalSample& sample, const Direction& eta) {
  return summarize(d2omega_pathwise_values(sample, eta));
}

Estimate d2omega_u_ibp_hat(const ConditionalSample& sample, const Direction& eta) {
  return summarize(d2omega_ibp_values(sample, eta));
}

Estimate d2omega_u_singular_hat(const ConditionalSample& sample) {
  return d2omega_u_ibp_hat(sample, Direction::singular_kernel());
}

std::vector<ConsistencyRow> derivative_consistency(const ConditionalSample& sample, const Direction& eta,
                                                   double bump) {
  if (!(bump > 0.0)) throw DomainError("bump size must be positive");
  const long n = sample.steps();
  const long paths = sample.paths;
  const PayoffSpec& phi = sample.config.payoff;
  const double eps = bump;
  std::vector<double> zero(static_cast<std::size_t>(n), 0.0);

  auto row = [&](std::string name, const std::vector<double>& est, const std::vector<double>& fd) {
    std::vector<double> diff(est.size());
    for (std::size_t p = 0; p < est.size(); ++p) diff[p] = est[p] - fd[p];
    ConsistencyRow r{std::move(name), summarize(est), summarize(fd), summarize(diff), 0.0, false};
    r.tolerance = r.difference.ci + 100.0 * eps * eps;
    r.pass = std::abs(r.difference.mean) <= r.tolerance;
    return r;
  };

  std::vector<ConsistencyRow> rows;
  {
    std::vector<double> first(paths), second(paths);
    for (long p = 0; p < paths; ++p) {
      const double up = phi.phi(0, reprice_path(sample, p, eps, zero));
      const double mid = phi.phi(0, sample.terminal[p]);
      const double dn = phi.phi(0, reprice_path(sample, p, -eps, zero));
      first[p] = (up - dn) / (2.0 * eps);
      second[p] = (up - 2.0 * mid + dn) / (eps * eps);
    }
    rows.push_back(row("du_dx", u_values(sample, 1), first));
    rows.push_back(row("d2u_dx2", u_values(sample, 2), second));
  }

  const std::pair<const char*, Direction> directions[] = {{"nodal", eta}, {"kernel", Direction::singular_kernel()}};
  for (const auto& [label, dir] : directions) {
    const auto e = eta_for(sample, dir);
    std::vector<double> plus(static_cast<std::size_t>(n)), minus(static_cast<std::size_t>(n));
    for (long j = 0; j < n; ++j) {
      plus[j] = eps * e[j];
      minus[j] = -eps * e[j];
    }
    std::vector<double> first(paths), second(paths), mixed(paths);
    for (long p = 0; p < paths; ++p) {
      const double up = phi.phi(0, reprice_path(sample, p, 0.0, plus));
      const double mid = phi.phi(0, sample.terminal[p]);
      const double dn = phi.phi(0, reprice_path(sample, p, 0.0, minus));
      first[p] = (up - dn) / (2.0 * eps);
      second[p] = (up - 2.0 * mid + dn) / (eps * eps);
      const double pp = phi.phi(0, reprice_path(sample, p, eps, plus));
      const double pm = phi.phi(0, reprice_path(sample, p, eps, minus));
      const double mp = phi.phi(0, reprice_path(sample, p, -eps, plus));
      const double mm = phi.phi(0, reprice_path(sample, p, -eps, minus));
      mixed[p] = (pp - pm - mp + mm) / (4.0 * eps * eps);
    }
    const std::string suffix = std::string("[") + label + "]";
    rows.push_back(row("domega_u" + suffix, domega_values(sample, dir, false), first));
    rows.push_back(row("domega_dx_u" + suffix, domega_values(sample, dir, true), mixed));
    rows.push_back(row("d2omega_u" + suffix, d2omega_pathwise_values(sample, dir), second));
    rows.push_back(row("d2omega_u_ibp" + suffix, d2omega_ibp_values(sample, dir), second));
  }
  return rows;
}

ResidualReport ppde_residual(double t, double x, const ForwardCurve& curve, const ModelConfig& config, long paths,
                             double time_step, std::uint64_t seed, int threads) {
  check_curve(curve, config);
  if (!close_to(curve.anchor(), t)) throw DomainError("forward curve must start at t");
  if (paths < 2) throw DomainError("residual needs at least 2 paths");
  if (!(t + time_step < config.horizon)) throw DomainError("residual needs t + dt < T");
  if (curve.steps() < kMinSubSteps) throw DomainError("sub-grid needs at least 8 steps");
  if (!close_to(time_step, curve.dt())) throw DomainError("time step must equal the sub-grid step");

  const ConditionalLaw law(config.hurst, t, config.horizon, curve.steps());
  const auto kt = kernel_cell_averages(law.kernel(), law.dt(), law.steps());
  const double h = law.dt();
  const double psi0 = config.vol.psi(0, curve.value(0));
  const long chunks = (paths + kChunk - 1) / kChunk;

  enum Slot { kResidual, kValue, kTime, kDrift, kDiffusion, kVolVol, kCross, kSlots };
  std::vector<std::array<RunningStats, kSlots>> partial(static_cast<std::size_t>(chunks));
  parallel_for(static_cast<std::size_t>(chunks), threads, [&](std::size_t c, int) {
    const long first = static_cast<long>(c) * kChunk;
    const long count = std::min(kChunk, paths - first);
    const ConditionalSample s = simulate_conditional(law, x, curve, config, first, count, seed);
    std::vector<double> scratch;
    auto& acc = partial[c];
    for (long p = 0; p < count; ++p) {
      const double xt = s.terminal[p];
      const double phi0 = config.payoff.phi(0, xt);
      const double phi1 = config.payoff.phi(1, xt);
      const double phi2 = config.payoff.phi(2, xt);
      const double time = (config.payoff.phi(0, s.terminal_next[p]) - phi0) / h;
      const double drift = config.zeta * psi0 * psi0 * phi1;
      const double diffusion = 0.5 * psi0 * psi0 * phi2;
      const double volvol = 0.5 * d2omega_ibp(s, p, kt, kt, scratch);
      const double cross = config.rho * psi0 * phi2 * weight(s, p, kt);
      acc[kResidual].add(time + drift + diffusion + volvol + cross);
      acc[kValue].add(phi0);
      acc[kTime].add(time);
      acc[kDrift].add(drift);
      acc[kDiffusion].add(diffusion);
      acc[kVolVol].add(volvol);
      acc[kCross].add(cross);
    }
  });
  std::array<RunningStats, kSlots> total;
  for (const auto& part : partial) {
    for (int k = 0; k < kSlots; ++k) total[k].merge(part[k]);
  }
  ResidualReport r;
  r.residual = total[kResidual].estimate();
  r.value = total[kValue].estimate();
  r.time_term = total[kTime].estimate();
  r.drift_term = total[kDrift].estimate();
  r.diffusion_term = total[kDiffusion].estimate();
  r.vol_of_vol_term = total[kVolVol].estimate();
  r.cross_term = total[kCross].estimate();
  r.paths = paths;
  return r;
}

TelescopeReport telescopic_check(const ModelConfig& config, const TelescopeOptions& opt) {
  config.validate();
  if (opt.coarse_steps < 1) throw DomainError("coarse steps must be at least 1");
  if (opt.lattice_steps < opt.coarse_steps || opt.lattice_steps % opt.coarse_steps != 0) {
    throw DomainError("lattice steps must be a multiple of the coarse steps");
  }
  if (opt.inner_steps < kMinSubSteps) throw DomainError("inner sub-grid needs at least 8 steps");
  if (opt.outer_paths < 2 || opt.inner_paths < 1) throw DomainError("telescopic check needs paths");
  if (opt.inner_budget < 0) throw DomainError("inner budget must be non-negative");

  const double T = config.horizon;
  const long nf = opt.lattice_steps;
  const long nc = opt.coarse_steps;
  const long ratio = nf / nc;
  const double hf = T / static_cast<double>(nf);
  const long ni = opt.inner_steps;
  const KernelSpec kernel(config.hurst);
  const VolSpec& vol = config.vol;
  const PayoffSpec& phi = config.payoff;

  // Lattice times strictly inside a coarse interval; the integrand vanishes at t_i.
  struct Slice {
    long lattice;
    std::unique_ptr<ConditionalLaw> law;
    std::vector<double> ktilde;
    // theta[j * lattice + m]: weight of dW_m in the forward curve at s_j.
    std::vector<double> theta;
  };
  std::vector<Slice> slices;
  for (long l = 1; l < nf; ++l) {
    if (l % ratio == 0) continue;
    Slice s;
    s.lattice = l;
    const double t = hf * static_cast<double>(l);
    s.law = std::make_unique<ConditionalLaw>(config.hurst, t, T, ni);
    s.ktilde = kernel_cell_averages(kernel, s.law->dt(), ni);
    s.theta.resize(static_cast<std::size_t>((ni + 1) * l));
    for (long j = 1; j <= ni; ++j) {
      const double sj = j == ni ? T : t + s.law->dt() * static_cast<double>(j);
      for (long m = 0; m < l; ++m) {
        s.theta[j * l + m] =
            k_primitive(kernel, sj, hf * static_cast<double>(m), hf * static_cast<double>(m + 1)) / hf;
      }
    }
    slices.push_back(std::move(s));
  }

  TelescopeReport report;
  report.outer_requested = opt.outer_paths;
  long outer = opt.outer_paths;
  const long per_outer = static_cast<long>(slices.size()) * opt.inner_paths;
  if (opt.inner_budget > 0 && per_outer > 0 && outer > opt.inner_budget / per_outer) {
    outer = opt.inner_budget / per_outer;
    report.conclusive = false;
  }
  report.outer_completed = outer;
  report.interval_terms.assign(static_cast<std::size_t>(nc), Estimate{});
  if (outer < 2) {
    report.conclusive = false;
    return report;
  }

  const JointGaussianSpec fine(config.hurst, UniformGrid(T, nf));
  const NoiseBundle bundle = sample_bundle(fine, config.rho, outer, derive_seed(opt.seed, 0, kOuterTag), 1);

  std::vector<double> lhs(static_cast<std::size_t>(outer)), rhs(static_cast<std::size_t>(outer));
  std::vector<double> terms(static_cast<std::size_t>(outer * nc), 0.0);
  const double rho_bar = config.rho_bar();

  parallel_for(static_cast<std::size_t>(outer), opt.threads, [&](std::size_t pi, int) {
    const long p = static_cast<long>(pi);
    const auto v = bundle.v(p);
    const auto dw = bundle.dw(p);
    const auto db = bundle.db(p);
    auto v_at = [&](long node) { return node == 0 ? 0.0 : v[node - 1]; };

    // Fine and coarse Euler, coarse state recorded at every lattice node.
    std::vector<double> coarse_state(static_cast<std::size_t>(nf + 1));
    double xf = config.x0;
    double xc = config.x0;
    coarse_state[0] = xc;
    for (long m = 0; m < nf; ++m) {
      const double pf = vol.psi(0, v_at(m));
      xf += config.zeta * pf * pf * hf + pf * db[m];
      const double pc = vol.psi(0, v_at((m / ratio) * ratio));
      xc += config.zeta * pc * pc * hf + pc * db[m];
      coarse_state[m + 1] = xc;
    }
    lhs[p] = phi.phi(0, xf) - phi.phi(0, xc);

    std::vector<double> curve_values(static_cast<std::size_t>(ni + 1));
    std::vector<double> inc(ni), inc_next(ni), idw(ni), idwbar(ni), vin(ni), scratch;
    double total = 0.0;
    for (const Slice& s : slices) {
      const long l = s.lattice;
      const long i = l / ratio;
      const double vt = v_at(l);
      const double vti = v_at(i * ratio);
      curve_values[0] = vt;
      for (long j = 1; j <= ni; ++j) {
        double acc = 0.0;
        for (long m = 0; m < l; ++m) acc += s.theta[j * l + m] * dw[m];
        curve_values[j] = acc;
      }
      const double x_t = coarse_state[l];
      const double h = s.law->dt();
      const std::uint64_t inner_seed = derive_seed(opt.seed, static_cast<std::uint64_t>(p * nf + l), kInnerTag);
      double sum_xx = 0.0;
      double sum_wx = 0.0;
      for (long q = 0; q < opt.inner_paths; ++q) {
        PathStream stream(inner_seed, static_cast<std::uint64_t>(q));
        s.law->draw(stream, inc, inc_next, idw, idwbar, scratch);
        double xt = x_t;
        double a = 0.0;
        for (long j = 0; j < ni; ++j) {
          const double vj = curve_values[j] + inc[j];
          const double dbj = config.rho * idw[j] + rho_bar * idwbar[j];
          const double psi = vol.psi(0, vj);
          xt += config.zeta * psi * psi * h + psi * dbj;
          if (j > 0) a += s.ktilde[j] * (vol.psi(1, vj) * dbj + config.zeta * vol.psi_sq(1, vj) * h);
        }
        const double p2 = phi.phi(2, xt);
        sum_xx += p2;
        sum_wx += p2 * a;
      }
      const double inv = 1.0 / static_cast<double>(opt.inner_paths);
      const double g = 0.5 * (vol.psi_sq(0, vt) - vol.psi_sq(0, vti)) * sum_xx * inv +
                       config.rho * (vol.psi(0, vt) - vol.psi(0, vti)) * sum_wx * inv;
      terms[p * nc + i] += hf * g;
      total += hf * g;
    }
    rhs[p] = total;
  });

  std::vector<double> diff(static_cast<std::size_t>(outer));
  for (long p = 0; p < outer; ++p) diff[p] = lhs[p] - rhs[p];
  report.lhs = summarize(lhs);
  report.rhs = summarize(rhs);
  report.difference = summarize(diff);
  for (long i = 0; i < nc; ++i) {
    RunningStats st;
    for (long p = 0; p < outer; ++p) st.add(terms[p * nc + i]);
    report.interval_terms[i] = st.estimate();
  }
  return report;
}

}  // namespace roughlab
