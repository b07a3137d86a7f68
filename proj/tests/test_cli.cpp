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

// End-to-end checks of the pvad command-line tool. The binary path arrives
// as the first program argument (wired up by CMake); every test shells out
// to it against a small scratch corpus under the system temp directory.

#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pvad/corpus.hpp"

namespace fs = std::filesystem;

namespace {

std::string g_pvad;  // absolute path to the pvad binary under test
fs::path g_work;     // scratch directory, removed at exit

struct CmdResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

CmdResult run(const std::string& args) {
  static int counter = 0;
  const fs::path log = g_work / ("cmd_" + std::to_string(counter++) + ".log");
  const std::string cmd =
      g_pvad + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  CmdResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::ostringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

std::vector<char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::vector<char>(std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>());
}

// Small corpus shared by the heavier tests, generated through the CLI on
// first use so the synth plumbing itself gets exercised.
const fs::path& corpus_dir() {
  static fs::path dir = [] {
    const fs::path d = g_work / "corpus";
    const CmdResult r = run(
        "synth --out " + d.string() +
        " --seed 7 --speakers 6 --train-speakers 4 --train-utts 10 "
        "--test-utts 6 --concat-max 2");
    REQUIRE_MESSAGE(r.exit_code == 0, r.output);
    REQUIRE(r.output.find("corpus written to") != std::string::npos);
    return d;
  }();
  return dir;
}

// Trained-once tiny ET model used by eval/stream/quantize tests.
const fs::path& et_model() {
  static fs::path path = [] {
    const fs::path p = g_work / "et_tiny.pvm";
    const CmdResult r = run("train --corpus " + corpus_dir().string() +
                            " --out " + p.string() +
                            " --arch et --epochs 1 --lr 1e-3 --heldout-frac 0 "
                            "--seed 2");
    REQUIRE_MESSAGE(r.exit_code == 0, r.output);
    REQUIRE(r.output.find("model written to") != std::string::npos);
    return p;
  }();
  return path;
}

}  // namespace

TEST_CASE("cli: help and argument errors use the documented exit codes") {
  CHECK(run("--help").exit_code == 0);
  CHECK(run("--help").output.find("synth") != std::string::npos);
  CHECK(run("").exit_code == 2);               // a subcommand is required
  CHECK(run("frobnicate").exit_code == 2);     // unknown subcommand
  CHECK(run("train --no-such-flag").exit_code == 2);
  CHECK(run("train").exit_code == 2);          // --corpus missing
  CHECK(run("synth --mtr sometimes --out " + (g_work / "x").string())
            .exit_code == 2);
}

TEST_CASE("cli: sc is rejected as a training target") {
  const CmdResult r = run("train --arch sc --corpus /tmp/nowhere");
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("--standard-vad") != std::string::npos);
}

TEST_CASE("cli: missing and corrupt files map to io errors") {
  CHECK(run("inspect --model " + (g_work / "missing.pvm").string()).exit_code ==
        4);
  CHECK(run("eval --corpus " + (g_work / "nocorpus").string() +
            " --model " + (g_work / "missing.pvm").string())
            .exit_code == 4);

  const fs::path bogus = g_work / "bogus.pvm";
  std::ofstream(bogus, std::ios::binary) << "this is not a model file";
  CHECK(run("inspect --model " + bogus.string()).exit_code == 4);
}

TEST_CASE("cli: synth is deterministic in the seed") {
  const fs::path again = g_work / "corpus_again";
  const CmdResult r = run(
      "synth --out " + again.string() +
      " --seed 7 --speakers 6 --train-speakers 4 --train-utts 10 "
      "--test-utts 6 --concat-max 2");
  REQUIRE_MESSAGE(r.exit_code == 0, r.output);

  CHECK(slurp(corpus_dir() / "manifest.jsonl") ==
        slurp(again / "manifest.jsonl"));
  CHECK(slurp(corpus_dir() / "speakers.txt") == slurp(again / "speakers.txt"));
  const pvad::CorpusManifest m = pvad::load_manifest(again);
  REQUIRE(!m.records.empty());
  CHECK(slurp(corpus_dir() / m.records[0].audio_path) ==
        slurp(again / m.records[0].audio_path));
}

TEST_CASE("cli: config file fills unset flags, flags win on conflict") {
  const fs::path cfg = g_work / "train.json";
  std::ofstream(cfg) << R"({"epochs": 1, "lr": 0.002})";
  // --epochs on the command line beats the file; lr comes from the file.
  const CmdResult r = run("train --corpus " + corpus_dir().string() +
                          " --out " + (g_work / "cfgtest.pvm").string() +
                          " --arch st --epochs 2 --heldout-frac 0 --seed 2" +
                          " --max-utts 4 --config " + cfg.string());
  REQUIRE_MESSAGE(r.exit_code == 0, r.output);
  CHECK(r.output.find("lr=0.002") != std::string::npos);
  CHECK(r.output.find("epochs=2") != std::string::npos);

  const fs::path bad = g_work / "bad.json";
  std::ofstream(bad) << R"({"epochz": 1})";
  const CmdResult e = run("train --corpus " + corpus_dir().string() +
                          " --config " + bad.string());
  CHECK(e.exit_code == 2);
  CHECK(e.output.find("epochz") != std::string::npos);
}

TEST_CASE("cli: train writes a loadable model and inspect reports it") {
  const CmdResult r = run("inspect --model " + et_model().string());
  REQUIRE_MESSAGE(r.exit_code == 0, r.output);
  CHECK(r.output.find("architecture: et") != std::string::npos);
  CHECK(r.output.find("parameters:  129795") != std::string::npos);
  CHECK(r.output.find("quantized:   no") != std::string::npos);
}

TEST_CASE("cli: eval prints the per-class table and micro mAP") {
  const CmdResult r = run("eval --corpus " + corpus_dir().string() +
                          " --model " + et_model().string() + " --mtr off");
  REQUIRE_MESSAGE(r.exit_code == 0, r.output);
  CHECK(r.output.find("split=test") != std::string::npos);
  CHECK(r.output.find("tss") != std::string::npos);
  CHECK(r.output.find("ntss") != std::string::npos);
  CHECK(r.output.find("micro") != std::string::npos);
}

TEST_CASE("cli: eval --trace dumps one line per frame") {
  const fs::path trace = g_work / "eval_trace.txt";
  const CmdResult r = run("eval --corpus " + corpus_dir().string() +
                          " --model " + et_model().string() +
                          " --mtr off --trace " + trace.string());
  REQUIRE_MESSAGE(r.exit_code == 0, r.output);
  REQUIRE(fs::exists(trace));
  std::ifstream in(trace);
  std::string line;
  int64_t lines = 0;
  while (std::getline(in, line)) ++lines;
  // One line per pooled frame: frame index, label token, three scores.
  CHECK(lines > 100);
}

TEST_CASE("cli: standard-vad eval reports the two speech APs") {
  const CmdResult r = run("eval --corpus " + corpus_dir().string() +
                          " --model " + et_model().string() +
                          " --mtr off --standard-vad");
  REQUIRE_MESSAGE(r.exit_code == 0, r.output);
  CHECK(r.output.find("single-speaker utterances") != std::string::npos);
  CHECK(r.output.find("AP(s)") != std::string::npos);
  CHECK(r.output.find("AP(ns)") != std::string::npos);
}

TEST_CASE("cli: stream over a corpus record emits a trace and latency stats") {
  const pvad::CorpusManifest m = pvad::load_manifest(corpus_dir());
  const auto test_records = m.split_records("test");
  REQUIRE(!test_records.empty());
  const fs::path trace = g_work / "stream_trace.txt";
  const CmdResult r = run("stream --model " + et_model().string() +
                          " --corpus " + corpus_dir().string() + " --record " +
                          test_records.front()->id + " --trace " +
                          trace.string());
  REQUIRE_MESSAGE(r.exit_code == 0, r.output);
  CHECK(r.output.find("frames: ") != std::string::npos);
  CHECK(r.output.find("latency ms/frame: p50") != std::string::npos);

  // The trace has one line per reported frame.
  const std::string tag = "frames: ";
  const size_t at = r.output.find(tag);
  const int64_t frames = std::atoll(r.output.c_str() + at + tag.size());
  std::ifstream in(trace);
  std::string line;
  int64_t lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == frames);
}

TEST_CASE("cli: stream rejects a scores file of the wrong length") {
  const pvad::CorpusManifest m = pvad::load_manifest(corpus_dir());
  const auto test_records = m.split_records("test");
  REQUIRE(!test_records.empty());
  const fs::path wav = m.root / test_records.front()->audio_path;

  // SET consumes per-frame scores; hand it a file with too few.
  const fs::path set_model = g_work / "set_tiny.pvm";
  if (!fs::exists(set_model)) {
    const CmdResult t = run("train --corpus " + corpus_dir().string() +
                            " --out " + set_model.string() +
                            " --arch set --epochs 1 --lr 1e-3 "
                            "--heldout-frac 0 --seed 2 --max-utts 4");
    REQUIRE_MESSAGE(t.exit_code == 0, t.output);
  }
  const fs::path scores = g_work / "short_scores.txt";
  std::ofstream(scores) << "0.5\n0.5\n0.5\n";
  const fs::path profile =
      pvad::profile_path(m.root, test_records.front()->target_speaker_id);
  const CmdResult r = run("stream --model " + set_model.string() + " --wav " +
                          wav.string() + " --profile " + profile.string() +
                          " --scores " + scores.string());
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("entries") != std::string::npos);
}

TEST_CASE("cli: quantize writes a smaller file that inspect recognizes") {
  const fs::path q = g_work / "et_tiny.q8.pvm";
  const CmdResult r = run("quantize --model " + et_model().string() +
                          " --out " + q.string());
  REQUIRE_MESSAGE(r.exit_code == 0, r.output);
  REQUIRE(fs::exists(q));
  CHECK(fs::file_size(q) < fs::file_size(et_model()) / 3);

  const CmdResult i = run("inspect --model " + q.string());
  REQUIRE_MESSAGE(i.exit_code == 0, i.output);
  CHECK(i.output.find("quantized:   yes") != std::string::npos);

  // With a corpus it also reports the float vs dequantized AP movement.
  const CmdResult d = run("quantize --model " + et_model().string() +
                          " --out " + q.string() + " --corpus " +
                          corpus_dir().string());
  REQUIRE_MESSAGE(d.exit_code == 0, d.output);
  CHECK(d.output.find("float weights:") != std::string::npos);
  CHECK(d.output.find("dequantized weights:") != std::string::npos);
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <path-to-pvad-binary> [doctest args]\n",
                 argv[0]);
    return 1;
  }
  g_pvad = fs::absolute(argv[1]).string();
  g_work = fs::temp_directory_path() /
           ("pvad_cli_tests_" + std::to_string(::getpid()));
  fs::create_directories(g_work);

  doctest::Context ctx;
  ctx.applyCommandLine(argc - 1, argv + 1);
  const int rc = ctx.run();

  std::error_code ec;
  fs::remove_all(g_work, ec);
  return rc;
}
