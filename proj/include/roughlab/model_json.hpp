#pragma once

#include <string>

#include "json.hpp"
#include "roughlab/model.hpp"

namespace roughlab {

VolSpec vol_from_json(const nlohmann::json& j, const std::string& path = "vol");
PayoffSpec payoff_from_json(const nlohmann::json& j, const std::string& path = "payoff");
ModelConfig model_from_json(const nlohmann::json& j, const std::string& path = "model");

nlohmann::json to_json(const VolSpec& vol);
nlohmann::json to_json(const PayoffSpec& payoff);
nlohmann::json to_json(const ModelConfig& config);

}  // namespace roughlab
