/*
 * Copyright 2026 The PVAD Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "pvad/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "pvad/errors.hpp"

namespace pvad {

RunConfigFile RunConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config file " + path.string() + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw UsageError("config file " + path.string() +
                     " must hold a JSON object");
  }
  RunConfigFile cfg;
  for (const auto& [key, value] : doc.items()) {
    if (value.is_boolean()) {
      cfg.values_[key] = value.get<bool>();
    } else if (value.is_number()) {
      cfg.values_[key] = value.get<double>();
    } else if (value.is_string()) {
      cfg.values_[key] = value.get<std::string>();
    } else {
      throw UsageError("config key '" + key +
                       "' must be a bool, number, or string");
    }
  }
  return cfg;
}

void RunConfigFile::require_known(
    const std::vector<std::string>& known_keys) const {
  const std::set<std::string> known(known_keys.begin(), known_keys.end());
  std::string extras;
  for (const auto& [key, value] : values_) {
    (void)value;
    if (known.count(key) == 0) {
      if (!extras.empty()) extras += ", ";
      extras += "'" + key + "'";
    }
  }
  if (!extras.empty()) {
    throw UsageError("unknown config key(s): " + extras);
  }
}

bool RunConfigFile::has(const std::string& key) const {
  return values_.count(key) > 0;
}

const RunConfigFile::Value& RunConfigFile::at(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw UsageError("config key '" + key + "' not present");
  }
  return it->second;
}

bool RunConfigFile::get_bool(const std::string& key) const {
  const Value& v = at(key);
  if (const bool* b = std::get_if<bool>(&v)) return *b;
  throw UsageError("config key '" + key + "' must be a bool");
}

double RunConfigFile::get_double(const std::string& key) const {
  const Value& v = at(key);
  if (const double* d = std::get_if<double>(&v)) return *d;
  throw UsageError("config key '" + key + "' must be a number");
}

int64_t RunConfigFile::get_int(const std::string& key) const {
  const double d = get_double(key);
  if (std::floor(d) != d || std::abs(d) > 9.0e15) {
    throw UsageError("config key '" + key + "' must be an integer");
  }
  return static_cast<int64_t>(d);
}

uint64_t RunConfigFile::get_uint(const std::string& key) const {
  const int64_t v = get_int(key);
  if (v < 0) throw UsageError("config key '" + key + "' must be >= 0");
  return static_cast<uint64_t>(v);
}

std::string RunConfigFile::get_string(const std::string& key) const {
  const Value& v = at(key);
  if (const std::string* s = std::get_if<std::string>(&v)) return *s;
  throw UsageError("config key '" + key + "' must be a string");
}

}  // namespace pvad
