#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "roughlab/errors.hpp"

namespace roughlab::json_access {

using nlohmann::json;

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline const json& object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  return j;
}

inline const json& required(const json& j, const std::string& key, const std::string& path) {
  object(j, path);
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(join(path, key) + ": required field missing");
  return *it;
}

inline double number(const json& j, const std::string& key, const std::string& path) {
  const json& v = required(j, key, path);
  if (!v.is_number()) throw ConfigError(join(path, key) + ": expected a number");
  return v.get<double>();
}

inline double number_or(const json& j, const std::string& key, const std::string& path, double fallback) {
  object(j, path);
  return j.contains(key) ? number(j, key, path) : fallback;
}

inline long integer(const json& j, const std::string& key, const std::string& path) {
  const json& v = required(j, key, path);
  if (!v.is_number_integer()) throw ConfigError(join(path, key) + ": expected an integer");
  return v.get<long>();
}

inline long integer_or(const json& j, const std::string& key, const std::string& path, long fallback) {
  object(j, path);
  return j.contains(key) ? integer(j, key, path) : fallback;
}

inline std::uint64_t seed_or(const json& j, const std::string& key, const std::string& path,
                             std::uint64_t fallback) {
  object(j, path);
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw ConfigError(join(path, key) + ": expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

inline std::string text(const json& j, const std::string& key, const std::string& path) {
  const json& v = required(j, key, path);
  if (!v.is_string()) throw ConfigError(join(path, key) + ": expected a string");
  return v.get<std::string>();
}

inline std::vector<double> numbers(const json& j, const std::string& key, const std::string& path) {
  const json& v = required(j, key, path);
  if (!v.is_array()) throw ConfigError(join(path, key) + ": expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(join(path, key) + "[" + std::to_string(i) + "]: expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

inline std::vector<long> integers(const json& j, const std::string& key, const std::string& path) {
  const json& v = required(j, key, path);
  if (!v.is_array()) throw ConfigError(join(path, key) + ": expected an array");
  std::vector<long> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_integer()) {
      throw ConfigError(join(path, key) + "[" + std::to_string(i) + "]: expected an integer");
    }
    out.push_back(v[i].get<long>());
  }
  return out;
}

}  // namespace roughlab::json_access
