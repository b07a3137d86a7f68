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

#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "pvad/config.hpp"
#include "pvad/errors.hpp"

using namespace pvad;
namespace fs = std::filesystem;

namespace {

// Writes `text` to a fresh file under the system temp dir and removes it on
// scope exit.
class TempJson {
 public:
  explicit TempJson(const std::string& text) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("pvad_cfg_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++) + ".json");
    std::ofstream out(path_);
    out << text;
  }
  ~TempJson() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

}  // namespace

TEST_CASE("config: scalar values load with the right types") {
  TempJson f(R"({"mtr": true, "epochs": 4, "lr": 0.0015, "arch": "set"})");
  RunConfigFile cfg = RunConfigFile::load(f.path());

  CHECK(cfg.values().size() == 4);
  CHECK(cfg.has("mtr"));
  CHECK(cfg.has("lr"));
  CHECK_FALSE(cfg.has("seed"));

  CHECK(cfg.get_bool("mtr") == true);
  CHECK(cfg.get_double("lr") == doctest::Approx(0.0015));
  CHECK(cfg.get_int("epochs") == 4);
  CHECK(cfg.get_uint("epochs") == 4);
  CHECK(cfg.get_string("arch") == "set");
}

TEST_CASE("config: integral getters reject fractional and huge numbers") {
  TempJson f(R"({"n": 3.5, "big": 1e16, "whole": 12.0})");
  RunConfigFile cfg = RunConfigFile::load(f.path());
  CHECK_THROWS_AS(cfg.get_int("n"), UsageError);
  CHECK_THROWS_AS(cfg.get_int("big"), UsageError);
  // A float literal that happens to be integral is accepted.
  CHECK(cfg.get_int("whole") == 12);
}

TEST_CASE("config: get_uint rejects negatives") {
  TempJson f(R"({"neg": -2, "ok": 7})");
  RunConfigFile cfg = RunConfigFile::load(f.path());
  CHECK_THROWS_AS(cfg.get_uint("neg"), UsageError);
  CHECK(cfg.get_uint("ok") == 7);
  CHECK(cfg.get_int("neg") == -2);
}

TEST_CASE("config: type mismatches raise usage errors") {
  TempJson f(R"({"flag": true, "num": 1.5, "name": "x"})");
  RunConfigFile cfg = RunConfigFile::load(f.path());
  CHECK_THROWS_AS(cfg.get_bool("num"), UsageError);
  CHECK_THROWS_AS(cfg.get_double("name"), UsageError);
  // Bools are not silently coerced to numbers.
  CHECK_THROWS_AS(cfg.get_double("flag"), UsageError);
  CHECK_THROWS_AS(cfg.get_string("flag"), UsageError);
  CHECK_THROWS_AS(cfg.get_double("absent"), UsageError);
}

TEST_CASE("config: require_known lists the offending keys") {
  TempJson f(R"({"epochs": 2, "epochz": 3})");
  RunConfigFile cfg = RunConfigFile::load(f.path());
  CHECK_NOTHROW(cfg.require_known({"epochs", "epochz", "lr"}));
  try {
    cfg.require_known({"epochs", "lr"});
    FAIL("expected UsageError");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("epochz") != std::string::npos);
  }
  // Empty config is fine against any key set.
  TempJson g("{}");
  CHECK_NOTHROW(RunConfigFile::load(g.path()).require_known({}));
}

TEST_CASE("config: malformed inputs are rejected") {
  SUBCASE("missing file") {
    CHECK_THROWS_AS(RunConfigFile::load("/nonexistent/pvad.json"), IoError);
  }
  SUBCASE("syntax error") {
    TempJson f("{\"a\": 1,,}");
    CHECK_THROWS_AS(RunConfigFile::load(f.path()), UsageError);
  }
  SUBCASE("top level must be an object") {
    TempJson f("[1, 2, 3]");
    CHECK_THROWS_AS(RunConfigFile::load(f.path()), UsageError);
  }
  SUBCASE("nested values are rejected") {
    TempJson f(R"({"inner": {"a": 1}})");
    CHECK_THROWS_AS(RunConfigFile::load(f.path()), UsageError);
  }
  SUBCASE("arrays are rejected") {
    TempJson f(R"({"xs": [1, 2]})");
    CHECK_THROWS_AS(RunConfigFile::load(f.path()), UsageError);
  }
  SUBCASE("null is rejected") {
    TempJson f(R"({"x": null})");
    CHECK_THROWS_AS(RunConfigFile::load(f.path()), UsageError);
  }
}
