#include "roughlab/cli/runner.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "roughlab/errors.hpp"

namespace roughlab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json effective_config(const json& config, const Overrides& overrides) {
  if (!config.is_object()) throw ConfigError("config: expected a JSON object");
  const auto it = config.find("command");
  if (it == config.end()) throw ConfigError("command: required field missing");
  if (!it->is_string()) throw ConfigError("command: expected a string");
  json effective = config;
  if (overrides.seed) {
    effective["seed"] = *overrides.seed;
  } else if (!effective.contains("seed")) {
    effective["seed"] = 1;
  }
  return effective;
}

std::string config_hash(const json& effective) { return hex64(fnv1a64(effective.dump())); }

fs::path output_root(const Overrides& overrides) {
  if (overrides.out) return *overrides.out;
  if (const char* env = std::getenv(kOutputRootVariable); env && *env) return env;
  return kDefaultOutputRoot;
}

CommandOutput dispatch(const json& effective, const fs::path& dir) {
  return run_command(effective.at("command").get<std::string>(), effective, dir);
}

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const fs::path& dir, const json& effective, const std::string& hash, const RunRecord& record,
                    const std::string& started) {
  json manifest{{"command", effective.at("command")},
                {"config_hash", hash},
                {"seed", effective.at("seed")},
                {"software_version", kSoftwareVersion},
                {"started", started},
                {"finished", utc_now()},
                {"exit_code", record.exit_code},
                {"status", record.exit_code == kExitSuccess ? "ok" : record.message},
                {"artifacts", record.output.artifacts},
                {"config", effective}};
  std::ofstream f(dir / "manifest.json", std::ios::binary);
  f << manifest.dump(2) << "\n";
}

}  // namespace

RunRecord run(const json& config, const Overrides& overrides, std::ostream& log) {
  RunRecord record;
  json effective;
  std::string hash;
  try {
    effective = effective_config(config, overrides);
    const std::string command = effective.at("command").get<std::string>();
    if (!known_command(command)) run_command(command, effective, {});
    hash = config_hash(effective);
    record.directory = output_root(overrides) / (command + "-" + hash);
    fs::remove_all(record.directory);
    fs::create_directories(record.directory);
  } catch (const ConfigError& e) {
    record.exit_code = kExitUsage;
    record.message = e.what();
    log << "roughlab: invalid config: " << e.what() << "\n";
    return record;
  } catch (const std::exception& e) {
    record.exit_code = kExitFailure;
    record.message = e.what();
    log << "roughlab: " << e.what() << "\n";
    return record;
  }

  const std::string started = utc_now();
  try {
    record.output = dispatch(effective, record.directory);
    if (!record.output.inconclusive.empty()) {
      record.exit_code = kExitInconclusive;
      record.message = record.output.inconclusive;
      log << "roughlab: " << record.message << "\n";
    }
  } catch (const ConfigError& e) {
    record.exit_code = kExitUsage;
    record.message = e.what();
    log << "roughlab: invalid config: " << e.what() << "\n";
  } catch (const DomainError& e) {
    record.exit_code = kExitUsage;
    record.message = e.what();
    log << "roughlab: invalid config: " << e.what() << "\n";
  } catch (const InconclusiveError& e) {
    record.exit_code = kExitInconclusive;
    record.message = e.what();
    log << "roughlab: " << e.what() << "\n";
  } catch (const NumericalError& e) {
    record.exit_code = kExitNumerical;
    record.message = e.what();
    log << "roughlab: numerical failure: " << e.what() << "\n";
  } catch (const std::exception& e) {
    record.exit_code = kExitFailure;
    record.message = e.what();
    log << "roughlab: " << e.what() << "\n";
  }
  write_manifest(record.directory, effective, hash, record, started);
  return record;
}

RunRecord run_file(const fs::path& config_file, const Overrides& overrides, std::ostream& log) {
  std::ifstream in(config_file);
  if (!in) {
    RunRecord record;
    record.exit_code = kExitUsage;
    record.message = "cannot open config file '" + config_file.string() + "'";
    log << "roughlab: " << record.message << "\n";
    return record;
  }
  json config;
  try {
    config = json::parse(in);
  } catch (const json::parse_error& e) {
    RunRecord record;
    record.exit_code = kExitUsage;
    record.message = std::string("config is not valid JSON: ") + e.what();
    log << "roughlab: " << record.message << "\n";
    return record;
  }
  return run(config, overrides, log);
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Rough volatility weak-rate laboratory", "roughlab"};
  std::string config_file;
  std::uint64_t seed = 0;
  std::string out;
  app.add_option("config", config_file, "JSON experiment config")->required();
  auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
  auto* out_opt = app.add_option("--out", out, "Output root directory");
  app.set_version_flag("--version", kSoftwareVersion);
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  Overrides overrides;
  if (*seed_opt) overrides.seed = seed;
  if (*out_opt) overrides.out = out;
  const RunRecord record = run_file(config_file, overrides, std::cerr);
  if (!record.directory.empty()) std::cout << record.directory.string() << "\n";
  return record.exit_code;
}

}  // namespace roughlab::cli
