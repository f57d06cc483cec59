#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace roughlab::cli {

inline constexpr char kSoftwareVersion[] = "roughlab 1.0.0";
inline constexpr char kOutputRootVariable[] = "ROUGHLAB_OUT";
inline constexpr char kDefaultOutputRoot[] = "roughlab_out";

enum ExitCode : int {
  kExitSuccess = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitNumerical = 3,
  kExitInconclusive = 4,
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
};

// Files written by one command, relative to the run directory.
struct CommandOutput {
  std::vector<std::string> artifacts;
  // Non-empty when the experiment ran but could not reach a verdict.
  std::string inconclusive;
  nlohmann::json summary = nlohmann::json::object();
};

struct RunRecord {
  int exit_code = kExitSuccess;
  std::filesystem::path directory;
  std::string message;
  CommandOutput output;
};

// 64-bit FNV-1a over the bytes of s.
std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t v);

// Config after applying overrides; the canonical dump of it is what gets hashed.
nlohmann::json effective_config(const nlohmann::json& config, const Overrides& overrides);
std::string config_hash(const nlohmann::json& effective);

// Output root: override, then the environment variable, then the default.
std::filesystem::path output_root(const Overrides& overrides);

// Dispatches on config["command"], writing artifacts into dir.
CommandOutput dispatch(const nlohmann::json& effective, const std::filesystem::path& dir);

// Full run: validates, creates <root>/<command>-<hash>/, writes artifacts and
// manifest.json. Errors are mapped to exit codes and reported on `log`.
RunRecord run(const nlohmann::json& config, const Overrides& overrides, std::ostream& log);
RunRecord run_file(const std::filesystem::path& config_file, const Overrides& overrides, std::ostream& log);

int main_entry(int argc, char** argv);

}  // namespace roughlab::cli
