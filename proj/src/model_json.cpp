#include "roughlab/model_json.hpp"

#include "roughlab/json_access.hpp"

namespace roughlab {

using nlohmann::json;
namespace ja = json_access;

VolSpec vol_from_json(const json& j, const std::string& path) {
  const std::string family = ja::text(j, "family", path);
  try {
    if (family == "exponential") return VolSpec::exponential(ja::number(j, "nu", path));
    if (family == "polynomial") return VolSpec::polynomial(ja::numbers(j, "coefficients", path));
    if (family == "shifted_linear") {
      return VolSpec::shifted_linear(ja::number(j, "a", path), ja::number(j, "b", path));
    }
  } catch (const DomainError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  throw ConfigError(ja::join(path, "family") + ": unknown volatility family '" + family + "'");
}

PayoffSpec payoff_from_json(const json& j, const std::string& path) {
  const std::string family = ja::text(j, "family", path);
  try {
    if (family == "quadratic") {
      return PayoffSpec::quadratic(ja::number_or(j, "a", path, 1.0), ja::number_or(j, "b", path, 0.0),
                                   ja::number_or(j, "c", path, 0.0));
    }
    if (family == "monomial") return PayoffSpec::monomial(static_cast<int>(ja::integer(j, "n", path)));
    if (family == "smooth_call") {
      return PayoffSpec::smooth_call(ja::number(j, "strike", path), ja::number_or(j, "smoothing", path, 0.05));
    }
  } catch (const DomainError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  throw ConfigError(ja::join(path, "family") + ": unknown payoff family '" + family + "'");
}

ModelConfig model_from_json(const json& j, const std::string& path) {
  ja::object(j, path);
  ModelConfig c;
  c.x0 = ja::number_or(j, "x0", path, 0.0);
  c.zeta = ja::number_or(j, "zeta", path, 0.0);
  c.rho = ja::number_or(j, "rho", path, 0.0);
  c.hurst = ja::number(j, "H", path);
  c.horizon = ja::number_or(j, "T", path, 1.0);
  c.vol = vol_from_json(ja::required(j, "vol", path), ja::join(path, "vol"));
  c.payoff = payoff_from_json(ja::required(j, "payoff", path), ja::join(path, "payoff"));
  try {
    c.validate();
  } catch (const DomainError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return c;
}

json to_json(const VolSpec& vol) {
  json j{{"family", vol.name()}};
  if (const auto* e = std::get_if<ExponentialVol>(&vol.family())) j["nu"] = e->nu;
  if (const auto* p = std::get_if<PolynomialVol>(&vol.family())) j["coefficients"] = p->coefficients;
  if (const auto* s = std::get_if<ShiftedLinearVol>(&vol.family())) {
    j["a"] = s->shift;
    j["b"] = s->slope;
  }
  return j;
}

json to_json(const PayoffSpec& payoff) {
  json j{{"family", payoff.name()}};
  if (const auto* q = std::get_if<QuadraticPayoff>(&payoff.family())) {
    j["a"] = q->a;
    j["b"] = q->b;
    j["c"] = q->c;
  }
  if (const auto* m = std::get_if<MonomialPayoff>(&payoff.family())) j["n"] = m->degree;
  if (const auto* s = std::get_if<SmoothCallPayoff>(&payoff.family())) {
    j["strike"] = s->strike;
    j["smoothing"] = s->smoothing;
  }
  return j;
}

json to_json(const ModelConfig& c) {
  return json{{"x0", c.x0},      {"zeta", c.zeta},          {"rho", c.rho},
              {"H", c.hurst},    {"T", c.horizon},          {"vol", to_json(c.vol)},
              {"payoff", to_json(c.payoff)}};
}

}  // namespace roughlab
