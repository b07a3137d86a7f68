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

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace pvad {

/// A flat JSON object of scalar settings, as accepted by `--config`.
/// Values are bools, numbers, or strings; anything nested is rejected.
/// Command-line flags take precedence over file values; the caller checks
/// flag presence before applying a file value.
class RunConfigFile {
 public:
  using Value = std::variant<bool, double, std::string>;

  RunConfigFile() = default;

  static RunConfigFile load(const std::filesystem::path& path);

  /// Rejects keys outside the given set (usage error naming the extras).
  void require_known(const std::vector<std::string>& known_keys) const;

  bool has(const std::string& key) const;

  bool get_bool(const std::string& key) const;
  double get_double(const std::string& key) const;
  int64_t get_int(const std::string& key) const;   // must be integral
  uint64_t get_uint(const std::string& key) const; // must be integral, >= 0
  std::string get_string(const std::string& key) const;

  const std::map<std::string, Value>& values() const { return values_; }

 private:
  const Value& at(const std::string& key) const;

  std::map<std::string, Value> values_;
};

}  // namespace pvad
