#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "roughlab/analytic_moments.hpp"
#include "roughlab/csv.hpp"
#include "roughlab/errors.hpp"
#include "roughlab/factor_io.hpp"
#include "roughlab/gaussian_sampler.hpp"
#include "roughlab/json_access.hpp"
#include "roughlab/kernel.hpp"
#include "roughlab/model_json.hpp"
#include "roughlab/ppde.hpp"
#include "roughlab/rate_lab.hpp"
#include "roughlab/scheme.hpp"
#include "roughlab/stats.hpp"

namespace roughlab::cli {

namespace {

using nlohmann::json;
namespace ja = json_access;
namespace fs = std::filesystem;

void allow_keys(const json& j, std::initializer_list<const char*> keys, const std::string& path = "") {
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) throw ConfigError(ja::join(path, item.key()) + ": unknown field");
  }
}

class ArtifactSink {
 public:
  ArtifactSink(const fs::path& dir, CommandOutput& out) : dir_(dir), out_(out) {}

  void text(const std::string& name, const std::string& content) {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    f << content;
    if (!f) throw std::runtime_error("write failed for " + (dir_ / name).string());
    out_.artifacts.push_back(name);
  }

  void json_file(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }

  fs::path reserve(const std::string& name) {
    out_.artifacts.push_back(name);
    return dir_ / name;
  }

 private:
  fs::path dir_;
  CommandOutput& out_;
};

json estimate_json(const Estimate& e) {
  return json{{"mean", e.mean}, {"ci", e.ci}, {"stddev", e.stddev}, {"count", e.count}};
}

json rate_json(const RateEstimate& r) {
  json points = json::array();
  for (const auto& p : r.points) points.push_back({{"N", p.steps}, {"error", p.error}, {"ci", p.ci}});
  return json{{"slope", r.slope}, {"intercept", r.intercept}, {"slope_stderr", r.slope_stderr}, {"points", points}};
}

std::vector<double> nonempty_numbers(const json& j, const std::string& key, const std::string& path,
                                     std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  auto v = ja::numbers(j, key, path);
  if (v.empty()) throw ConfigError(ja::join(path, key) + ": list must not be empty");
  return v;
}

std::vector<long> levels_of(const json& j, std::vector<long> fallback) {
  if (!j.contains("levels")) return fallback;
  auto v = ja::integers(j, "levels", "");
  if (v.empty()) throw ConfigError("levels: list must not be empty");
  return v;
}

long positive(const json& j, const std::string& key, long fallback, long minimum = 1) {
  const long v = ja::integer_or(j, key, "", fallback);
  if (v < minimum) throw ConfigError(key + ": must be at least " + std::to_string(minimum));
  return v;
}

int threads_of(const json& j) {
  const long v = ja::integer_or(j, "threads", "", 1);
  if (v < 0) throw ConfigError("threads: must be non-negative (0 selects all cores)");
  return static_cast<int>(v);
}

std::string csv_of(const std::vector<LevelRow>& rows, const char* error_name) {
  std::ostringstream os;
  CsvWriter w(os);
  w.cell("N").cell(error_name).cell("ci").cell("used");
  w.end_row();
  for (const auto& r : rows) {
    w.cell(r.steps).cell(r.error).cell(r.ci).cell(r.used ? 1 : 0);
    w.end_row();
  }
  return os.str();
}

// ---------------------------------------------------------------- kernels

CommandOutput cmd_kernels(const json& cfg, const fs::path& dir) {
  allow_keys(cfg, {"command", "seed", "threads", "beta_suite", "delta_k_suite"});
  CommandOutput out;
  ArtifactSink sink(dir, out);

  const json beta_cfg = cfg.value("beta_suite", json::object());
  ja::object(beta_cfg, "beta_suite");
  allow_keys(beta_cfg, {"H", "beta", "t"}, "beta_suite");
  const auto hs = nonempty_numbers(beta_cfg, "H", "beta_suite", {0.05, 0.1, 0.25, 0.4, 0.5});
  const auto betas = nonempty_numbers(beta_cfg, "beta", "beta_suite", {0.0, 0.5, 1.0, 2.0});
  const auto ts = nonempty_numbers(beta_cfg, "t", "beta_suite", {0.5, 1.0, 2.0});

  std::ostringstream beta_csv;
  CsvWriter bw(beta_csv);
  bw.cell("H").cell("t").cell("t_i").cell("alpha").cell("value").cell("oracle").cell("rel_err");
  bw.end_row();
  double max_rel = 0.0;
  try {
    for (double h : hs) {
      const KernelSpec k(h);
      for (double b : betas) {
        for (double t : ts) {
          const double value = weighted_kernel_integral(k, t, b);
          const double oracle = beta_identity_rhs(k, t, b);
          const double rel = std::abs(value - oracle) / std::abs(oracle);
          max_rel = std::max(max_rel, rel);
          bw.cell(h).cell(t).cell(0.0).cell(b).cell(value).cell(oracle).cell(rel);
          bw.end_row();
        }
      }
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("beta_suite: ") + e.what());
  }
  sink.text("kernels.csv", beta_csv.str());

  const json dk_cfg = cfg.value("delta_k_suite", json::object());
  ja::object(dk_cfg, "delta_k_suite");
  allow_keys(dk_cfg, {"H", "alpha_over_H", "k", "t"}, "delta_k_suite");
  const auto dk_h = nonempty_numbers(dk_cfg, "H", "delta_k_suite", {0.1, 0.2, 0.4});
  const auto multiples = nonempty_numbers(dk_cfg, "alpha_over_H", "delta_k_suite", {0.0, 2.0});
  std::vector<long> ks{3, 4, 5, 6, 7, 8, 9};
  if (dk_cfg.contains("k")) {
    ks = ja::integers(dk_cfg, "k", "delta_k_suite");
    if (ks.size() < 3) throw ConfigError("delta_k_suite.k: at least three exponents are required");
  }
  const double t = ja::number_or(dk_cfg, "t", "delta_k_suite", 1.0);

  std::ostringstream dk_csv, slope_csv;
  CsvWriter dw(dk_csv), sw(slope_csv);
  dw.cell("H").cell("t").cell("t_i").cell("alpha").cell("value");
  dw.end_row();
  sw.cell("H").cell("alpha").cell("slope").cell("slope_stderr").cell("expected");
  sw.end_row();
  json slopes = json::array();
  try {
    for (double h : dk_h) {
      const KernelSpec k(h);
      for (double m : multiples) {
        const double alpha = m * h;
        std::vector<RatePoint> pts;
        for (long e : ks) {
          const double dt = std::ldexp(1.0, static_cast<int>(-e));
          const double value = delta_k_weighted_integral(k, t, t - dt, alpha);
          dw.cell(h).cell(t).cell(t - dt).cell(alpha).cell(value);
          dw.end_row();
          // Regression in 1/dt so that the slope sign matches the increment exponent.
          pts.push_back({std::lround(1.0 / dt), value, 0.0});
        }
        const RateEstimate fit = regress_loglog(pts);
        const double expected = alpha + h + 0.5;
        sw.cell(h).cell(alpha).cell(-fit.slope).cell(fit.slope_stderr).cell(expected);
        sw.end_row();
        slopes.push_back({{"H", h}, {"alpha", alpha}, {"slope", -fit.slope}, {"expected", expected}});
      }
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("delta_k_suite: ") + e.what());
  }
  sink.text("delta_k.csv", dk_csv.str());
  sink.text("delta_k_slopes.csv", slope_csv.str());
  out.summary = {{"max_rel_err", max_rel}, {"delta_k_slopes", slopes}};
  sink.json_file("summary.json", out.summary);
  return out;
}

// ----------------------------------------------------------------- sample

CommandOutput cmd_sample(const json& cfg, const fs::path& dir) {
  allow_keys(cfg, {"command", "seed", "threads", "H", "T", "N", "M", "rho", "write_paths", "write_factor",
                   "moments"});
  const double hurst = ja::number(cfg, "H", "");
  const double horizon = ja::number_or(cfg, "T", "", 1.0);
  const long steps = positive(cfg, "N", 0);
  const long paths = positive(cfg, "M", 0);
  const double rho = ja::number_or(cfg, "rho", "", 0.0);
  const std::uint64_t seed = ja::seed_or(cfg, "seed", "", 1);
  const int threads = threads_of(cfg);
  if (steps > 65535) throw ConfigError("N: must fit the factor dump header (at most 65535)");
  CommandOutput out;
  ArtifactSink sink(dir, out);

  std::unique_ptr<JointGaussianSpec> spec;
  try {
    spec = std::make_unique<JointGaussianSpec>(hurst, UniformGrid(horizon, steps));
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  const NoiseBundle bundle = sample_bundle(*spec, rho, paths, seed, threads);

  if (cfg.value("write_factor", true)) write_factor_dump(sink.reserve("factor.bin"), *spec);
  if (cfg.value("write_paths", true)) {
    std::ostringstream os;
    write_path_csv(os, bundle);
    sink.text("paths.csv", os.str());
  }
  json summary{{"jitter", spec->jitter()}, {"paths", paths}, {"steps", steps}};
  if (cfg.value("moments", true)) {
    std::ostringstream os;
    CsvWriter w(os);
    w.cell("node").cell("t").cell("var").cell("var_se").cell("var_exact").cell("fourth").cell("fourth_se");
    w.cell("fourth_exact").cell("exp_half").cell("exp_half_se").cell("exp_half_exact");
    w.end_row();
    double worst = 0.0;
    for (long i = 1; i <= steps; ++i) {
      RunningStats sq, q4, ex;
      for (long p = 0; p < paths; ++p) {
        const double v = bundle.v(p)[i - 1];
        sq.add(v * v);
        q4.add(v * v * v * v);
        ex.add(std::exp(0.5 * v));
      }
      const double t = spec->grid().node(i);
      const auto se = [&](const RunningStats& s) { return s.stddev() / std::sqrt(static_cast<double>(paths)); };
      const double vx = v_variance(hurst, t), fx = v_moment(hurst, t, 4), ex_exact = v_expmoment(hurst, t, 0.5);
      w.cell(i).cell(t).cell(sq.mean()).cell(se(sq)).cell(vx).cell(q4.mean()).cell(se(q4)).cell(fx);
      w.cell(ex.mean()).cell(se(ex)).cell(ex_exact);
      w.end_row();
      if (paths > 1) {
        worst = std::max({worst, std::abs(sq.mean() - vx) / se(sq), std::abs(q4.mean() - fx) / se(q4),
                          std::abs(ex.mean() - ex_exact) / se(ex)});
      }
    }
    sink.text("moments.csv", os.str());
    summary["max_standard_errors"] = worst;
  }
  out.summary = summary;
  sink.json_file("summary.json", summary);
  return out;
}

// -------------------------------------------------------------- weak-rate

ExperimentPlan plan_of(const json& cfg) {
  ExperimentPlan plan;
  plan.config = model_from_json(ja::required(cfg, "model", ""), "model");
  plan.levels = levels_of(cfg, plan.levels);
  plan.fine_steps = positive(cfg, "fine_steps", plan.fine_steps);
  plan.paths = positive(cfg, "paths", plan.paths);
  plan.replications = static_cast<int>(positive(cfg, "replications", plan.replications));
  plan.seed = ja::seed_or(cfg, "seed", "", plan.seed);
  plan.threads = threads_of(cfg);
  return plan;
}

CommandOutput cmd_weak_rate(const json& cfg, const fs::path& dir) {
  allow_keys(cfg, {"command", "seed", "threads", "case", "model", "levels", "fine_steps", "paths", "replications",
                   "cross_check_quadratic"});
  const std::string which = ja::text(cfg, "case", "");
  ExperimentPlan plan = plan_of(cfg);
  if (which == "case1") {
    plan.levels = levels_of(cfg, {8, 16, 32, 64, 128, 256, 512, 1024});
  } else if (which != "case2") {
    throw ConfigError("case: expected 'case1' or 'case2'");
  }
  CommandOutput out;
  ArtifactSink sink(dir, out);
  json report{{"case", which}};

  if (which == "case1") {
    std::vector<LevelRow> rows;
    try {
      rows = case1_rows(plan);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
    sink.text("levels.csv", csv_of(rows, "error"));
    try {
      const RateEstimate est = run_case1(plan);
      report["status"] = "ok";
      report["rate"] = rate_json(est);
    } catch (const InconclusiveError& e) {
      report["status"] = e.what();
      out.inconclusive = e.what();
    }
  } else {
    if (plan.config.vol.is_constant()) {
      report["status"] = kDegenerateMessage;
      out.inconclusive = kDegenerateMessage;
      sink.json_file("rate.json", report);
      out.summary = report;
      return out;
    }
    std::vector<PayoffSpec> payoffs{plan.config.payoff};
    const bool cross = cfg.value("cross_check_quadratic", false);
    const PayoffSpec quadratic = PayoffSpec::quadratic(1.0, 0.0, 0.0);
    if (cross) payoffs.push_back(quadratic);
    std::vector<std::vector<LevelRow>> tables;
    try {
      tables = weak_error_tables(plan, payoffs);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
    WeakRateReport rep = gate_and_regress(tables.front());
    sink.text("levels.csv", csv_of(rep.rows, "error"));
    report["status"] = rep.status == RateStatus::ok ? "ok" : "inconclusive";
    report["message"] = rep.message;
    if (rep.estimate) report["rate"] = rate_json(*rep.estimate);
    if (rep.status != RateStatus::ok) out.inconclusive = rep.message;
    if (cross) {
      ModelConfig qc = plan.config;
      qc.payoff = quadratic;
      const double fine_error = exact_weak_error_quadratic(qc, UniformGrid(qc.horizon, plan.fine_steps));
      std::ostringstream os;
      CsvWriter w(os);
      w.cell("N").cell("mc_error").cell("ci").cell("analytic").cell("within_ci");
      w.end_row();
      bool all = true;
      for (const auto& r : tables[1]) {
        const double analytic = exact_weak_error_quadratic(qc, UniformGrid(qc.horizon, r.steps)) - fine_error;
        const bool ok = std::abs(r.error - analytic) <= r.ci;
        all = all && ok;
        w.cell(r.steps).cell(r.error).cell(r.ci).cell(analytic).cell(ok ? 1 : 0);
        w.end_row();
      }
      sink.text("cross_check.csv", os.str());
      report["cross_check_within_ci"] = all;
    }
  }
  sink.json_file("rate.json", report);
  out.summary = report;
  return out;
}

// ------------------------------------------------------------ strong-rate

CommandOutput cmd_strong_rate(const json& cfg, const fs::path& dir) {
  allow_keys(cfg, {"command", "seed", "threads", "model", "levels", "fine_steps", "paths", "raw_terminals"});
  ExperimentPlan plan = plan_of(cfg);
  plan.levels = levels_of(cfg, {16, 32, 64, 128, 256, 512});
  plan.paths = positive(cfg, "paths", 10000);
  CommandOutput out;
  ArtifactSink sink(dir, out);
  json report;
  if (plan.config.vol.is_constant()) {
    report["status"] = kDegenerateMessage;
    out.inconclusive = kDegenerateMessage;
    sink.json_file("rate.json", report);
    out.summary = report;
    return out;
  }
  std::vector<long> levels;
  try {
    plan.validate_monte_carlo();
    levels = plan.sorted_levels();
    if (plan.paths < kMinStrongPaths) throw DomainError("paths: strong error needs at least 100 paths");
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  const JointGaussianSpec fine(plan.config.hurst, UniformGrid(plan.config.horizon, plan.fine_steps));
  const LevelTerminals table = level_terminals(plan.config, fine, levels, plan.paths, plan.seed, plan.threads);
  const auto reference = table.column(levels.size());
  std::ostringstream os;
  CsvWriter w(os);
  w.cell("N").cell("rms").cell("ci");
  w.end_row();
  std::vector<RatePoint> points;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const StrongError e = strong_error(table.column(l), reference);
    w.cell(levels[l]).cell(e.rms).cell(e.ci);
    w.end_row();
    if (e.rms > 0.0) points.push_back({levels[l], e.rms, e.ci});
  }
  sink.text("levels.csv", os.str());
  if (cfg.value("raw_terminals", false)) {
    std::ostringstream raw;
    CsvWriter rw(raw);
    rw.cell("path");
    for (long n : levels) rw.cell("N" + std::to_string(n));
    rw.cell("N" + std::to_string(plan.fine_steps));
    rw.end_row();
    for (long p = 0; p < plan.paths; ++p) {
      rw.cell(p);
      for (std::size_t s = 0; s <= levels.size(); ++s) rw.cell(table.at(p, s));
      rw.end_row();
    }
    sink.text("terminals.csv", raw.str());
  }
  if (points.size() >= 3) {
    report["status"] = "ok";
    report["rate"] = rate_json(regress_loglog(points));
  } else {
    report["status"] = kDegenerateMessage;
    out.inconclusive = kDegenerateMessage;
  }
  sink.json_file("rate.json", report);
  out.summary = report;
  return out;
}

// ------------------------------------------------------------------- ppde

ForwardCurve curve_of(const json& cfg, double t, double horizon) {
  const json& omega = ja::required(cfg, "omega", "");
  const auto steps_or_default = [&] {
    const long n = ja::integer_or(cfg, "steps", "", 64);
    if (t < horizon && n < kMinSubSteps) throw ConfigError("steps: sub-grid needs at least 8 steps");
    return t == horizon ? 0 : n;
  };
  if (omega.is_number()) return ForwardCurve::constant(t, horizon, steps_or_default(), omega.get<double>());
  if (omega.is_array()) {
    const auto values = ja::numbers(cfg, "omega", "");
    if (cfg.contains("steps") && ja::integer(cfg, "steps", "") + 1 != static_cast<long>(values.size())) {
      throw ConfigError("omega: expected steps + 1 node values");
    }
    if (t < horizon && static_cast<long>(values.size()) < kMinSubSteps + 1) {
      throw ConfigError("omega: sub-grid needs at least 9 node values");
    }
    return ForwardCurve(t, horizon, values);
  }
  if (omega.is_object()) {
    allow_keys(omega, {"csv"}, "omega");
    const std::string file = ja::text(omega, "csv", "omega");
    std::ifstream in(file);
    if (!in) throw ConfigError("omega.csv: cannot open '" + file + "'");
    std::string line;
    std::vector<double> s, w;
    bool header = true;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (header) {
        header = false;
        if (line.find_first_not_of("0123456789+-.eE, ") != std::string::npos) continue;
      }
      const auto comma = line.find(',');
      if (comma == std::string::npos) throw ConfigError("omega.csv: expected two columns (s, omega)");
      try {
        s.push_back(std::stod(line.substr(0, comma)));
        w.push_back(std::stod(line.substr(comma + 1)));
      } catch (const std::exception&) {
        throw ConfigError("omega.csv: malformed row '" + line + "'");
      }
    }
    return ForwardCurve::interpolate(t, horizon, steps_or_default(), s, w);
  }
  throw ConfigError("omega: expected a number, an array of node values or {\"csv\": file}");
}

CommandOutput cmd_ppde(const json& cfg, const fs::path& dir) {
  allow_keys(cfg, {"command", "seed", "threads", "model", "t", "x", "omega", "steps", "direction", "M", "bump",
                   "residual", "consistency"});
  const ModelConfig config = model_from_json(ja::required(cfg, "model", ""), "model");
  const double t = ja::number(cfg, "t", "");
  const double x = ja::number(cfg, "x", "");
  const long paths = positive(cfg, "M", 0);
  const std::uint64_t seed = ja::seed_or(cfg, "seed", "", 1);
  const int threads = threads_of(cfg);
  const double bump = ja::number_or(cfg, "bump", "", 1e-3);
  if (!(t >= 0.0 && t <= config.horizon)) throw ConfigError("t: must lie in [0, T]");
  if (!(bump > 0.0)) throw ConfigError("bump: must be positive");

  ForwardCurve curve = [&] {
    try {
      return curve_of(cfg, t, config.horizon);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("omega: ") + e.what());
    }
  }();
  Direction direction = Direction::singular_kernel();
  if (cfg.contains("direction")) {
    const json& d = cfg.at("direction");
    if (d.is_string()) {
      if (d.get<std::string>() != "kernel") throw ConfigError("direction: expected \"kernel\" or node values");
    } else {
      const auto values = ja::numbers(cfg, "direction", "");
      if (static_cast<long>(values.size()) != curve.steps() + 1) {
        throw ConfigError("direction: expected one value per curve node");
      }
      direction = Direction::nodal(values);
    }
  }

  CommandOutput out;
  ArtifactSink sink(dir, out);
  {
    std::ostringstream os;
    CsvWriter w(os);
    w.cell("s").cell("omega");
    w.end_row();
    for (long j = 0; j <= curve.steps(); ++j) {
      w.cell(curve.node(j)).cell(curve.value(j));
      w.end_row();
    }
    sink.text("curve.csv", os.str());
  }

  const ConditionalSample sample = simulate_conditional(t, x, curve, config, paths, seed, threads);
  const Estimate value = u_hat(sample);
  json components{
      {"du_dx", estimate_json(du_dx_hat(sample))},
      {"d2u_dx2", estimate_json(d2u_dx2_hat(sample))},
      {"domega_u", estimate_json(domega_u_hat(sample, direction))},
      {"domega_dx_u", estimate_json(domega_dx_u_hat(sample, direction))},
      {"d2omega_u", estimate_json(d2omega_u_hat(sample, direction))},
      {"d2omega_u_ibp", estimate_json(d2omega_u_ibp_hat(sample, direction))},
      {"d2omega_u_singular", estimate_json(d2omega_u_singular_hat(sample))},
  };
  json response{{"value", value.mean},
                {"ci", value.ci},
                {"direction", direction.singular() ? json("kernel") : json(direction.values())},
                {"components", components}};

  const bool interior = sample.steps() > 0;
  if (interior && cfg.value("consistency", false)) {
    json rows = json::array();
    for (const auto& r : derivative_consistency(sample, direction, bump)) {
      rows.push_back({{"name", r.name},
                      {"estimator", estimate_json(r.estimator)},
                      {"bump", estimate_json(r.bump)},
                      {"difference", estimate_json(r.difference)},
                      {"tolerance", r.tolerance},
                      {"pass", r.pass}});
    }
    response["consistency"] = rows;
  }
  if (cfg.value("residual", false)) {
    if (!interior || !(t + curve.dt() < config.horizon)) {
      throw ConfigError("residual: needs t + dt < T on the sub-grid");
    }
    const ResidualReport r = ppde_residual(t, x, curve, config, paths, curve.dt(), seed, threads);
    response["residual"] = {{"value", estimate_json(r.residual)},
                            {"u", estimate_json(r.value)},
                            {"time", estimate_json(r.time_term)},
                            {"drift", estimate_json(r.drift_term)},
                            {"diffusion", estimate_json(r.diffusion_term)},
                            {"vol_of_vol", estimate_json(r.vol_of_vol_term)},
                            {"cross", estimate_json(r.cross_term)}};
  }
  sink.json_file("response.json", response);
  out.summary = {{"value", value.mean}, {"ci", value.ci}};
  return out;
}

// -------------------------------------------------------------- telescope

CommandOutput cmd_telescope(const json& cfg, const fs::path& dir) {
  allow_keys(cfg, {"command", "seed", "threads", "model", "N", "lattice_steps", "inner_steps", "outer_paths",
                   "inner_paths", "inner_budget"});
  const ModelConfig config = model_from_json(ja::required(cfg, "model", ""), "model");
  TelescopeOptions opt;
  opt.coarse_steps = positive(cfg, "N", 2);
  if (opt.coarse_steps > 4) throw ConfigError("N: nested Monte Carlo supports N in {2, 3, 4} only");
  if (opt.coarse_steps < 2) throw ConfigError("N: nested Monte Carlo supports N in {2, 3, 4} only");
  opt.lattice_steps = positive(cfg, "lattice_steps", 8 * opt.coarse_steps);
  opt.inner_steps = positive(cfg, "inner_steps", 16, kMinSubSteps);
  opt.outer_paths = positive(cfg, "outer_paths", 2000, 2);
  opt.inner_paths = positive(cfg, "inner_paths", 2000);
  opt.inner_budget = ja::integer_or(cfg, "inner_budget", "", 0);
  opt.seed = ja::seed_or(cfg, "seed", "", 1);
  opt.threads = threads_of(cfg);

  TelescopeReport rep;
  try {
    rep = telescopic_check(config, opt);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  CommandOutput out;
  ArtifactSink sink(dir, out);
  json terms = json::array();
  for (const auto& e : rep.interval_terms) terms.push_back(estimate_json(e));
  json report{{"lhs", estimate_json(rep.lhs)},
              {"rhs", estimate_json(rep.rhs)},
              {"difference", estimate_json(rep.difference)},
              {"combined_ci", rep.difference.ci},
              {"within_3ci", std::abs(rep.difference.mean) <= 3.0 * rep.difference.ci},
              {"interval_terms", terms},
              {"outer_completed", rep.outer_completed},
              {"outer_requested", rep.outer_requested},
              {"conclusive", rep.conclusive}};
  if (!rep.conclusive) out.inconclusive = "inconclusive: inner path budget exceeded";
  sink.json_file("report.json", report);
  out.summary = report;
  return out;
}

}  // namespace

CommandOutput run_command(const std::string& command, const json& cfg, const fs::path& dir) {
  if (command == "kernels") return cmd_kernels(cfg, dir);
  if (command == "sample") return cmd_sample(cfg, dir);
  if (command == "weak-rate") return cmd_weak_rate(cfg, dir);
  if (command == "strong-rate") return cmd_strong_rate(cfg, dir);
  if (command == "ppde") return cmd_ppde(cfg, dir);
  if (command == "telescope") return cmd_telescope(cfg, dir);
  throw ConfigError("command: unknown command '" + command +
                    "' (expected kernels, sample, weak-rate, strong-rate, ppde or telescope)");
}

bool known_command(const std::string& command) {
  static const std::set<std::string> names{"kernels", "sample", "weak-rate", "strong-rate", "ppde", "telescope"};
  return names.count(command) > 0;
}

}  // namespace roughlab::cli
