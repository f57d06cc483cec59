#pragma once

#include <filesystem>
#include <string>

#include "roughlab/cli/runner.hpp"

namespace roughlab::cli {

CommandOutput run_command(const std::string& command, const nlohmann::json& config,
                          const std::filesystem::path& dir);
bool known_command(const std::string& command);

}  // namespace roughlab::cli
