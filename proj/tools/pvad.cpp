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

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pvad/audio.hpp"
#include "pvad/config.hpp"
#include "pvad/corpus.hpp"
#include "pvad/dataset.hpp"
#include "pvad/errors.hpp"
#include "pvad/eval.hpp"
#include "pvad/features.hpp"
#include "pvad/model.hpp"
#include "pvad/model_io.hpp"
#include "pvad/trainer.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitIo = 4;

// Applies `--config` file values to options the user did not set on the
// command line; flags always win. Unknown keys are rejected up front.
class ConfigOverlay {
 public:
  ConfigOverlay(const std::string& path, const CLI::App* cmd) : cmd_(cmd) {
    if (!path.empty()) file_ = pvad::RunConfigFile::load(path);
  }

  void finish() const { file_.require_known(known_); }

  void str(const char* flag, const char* key, std::string& var) {
    note(key);
    if (file_.has(key) && cmd_->count(flag) == 0) var = file_.get_string(key);
  }
  void real(const char* flag, const char* key, double& var) {
    note(key);
    if (file_.has(key) && cmd_->count(flag) == 0) var = file_.get_double(key);
  }
  void integer(const char* flag, const char* key, int& var) {
    note(key);
    if (file_.has(key) && cmd_->count(flag) == 0) {
      var = static_cast<int>(file_.get_int(key));
    }
  }
  void unsigned64(const char* flag, const char* key, uint64_t& var) {
    note(key);
    if (file_.has(key) && cmd_->count(flag) == 0) var = file_.get_uint(key);
  }
  void boolean(const char* flag, const char* key, bool& var) {
    note(key);
    if (file_.has(key) && cmd_->count(flag) == 0) var = file_.get_bool(key);
  }

 private:
  void note(const char* key) { known_.emplace_back(key); }

  pvad::RunConfigFile file_;
  const CLI::App* cmd_;
  mutable std::vector<std::string> known_;
};

bool parse_on_off(const std::string& v, const char* flag) {
  if (v == "on") return true;
  if (v == "off") return false;
  throw pvad::UsageError(std::string(flag) + " must be 'on' or 'off', got '" +
                         v + "'");
}

pvad::LossKind loss_from_string(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "ce") return pvad::LossKind::kCrossEntropy;
  if (lower == "wpl") return pvad::LossKind::kWeightedPairwise;
  throw pvad::UsageError("unknown loss '" + name + "' (want ce|wpl)");
}

double percentile(std::vector<double> sorted_ms, double q) {
  std::sort(sorted_ms.begin(), sorted_ms.end());
  const auto n = static_cast<double>(sorted_ms.size());
  const auto idx = static_cast<size_t>(std::clamp(
      std::ceil(q * n) - 1.0, 0.0, n - 1.0));
  return sorted_ms[idx];
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthOpts {
  std::string out = "corpus";
  std::string config;
  std::string mtr = "on";
  uint64_t seed = 1;
  int speakers = 20;
  int train_speakers = 14;
  int train_utts = 2000;
  int test_utts = 500;
  int concat_min = 1;
  int concat_max = 3;
  double noise_prob = 0.9;
  double snr_min = 0.0;
  double snr_max = 30.0;
  double reverb_prob = 0.5;
};

void run_synth(const CLI::App* cmd, SynthOpts o) {
  ConfigOverlay cfg(o.config, cmd);
  cfg.str("--mtr", "mtr", o.mtr);
  cfg.unsigned64("--seed", "seed", o.seed);
  cfg.str("--out", "out", o.out);
  cfg.integer("--speakers", "speakers", o.speakers);
  cfg.integer("--train-speakers", "train_speakers", o.train_speakers);
  cfg.integer("--train-utts", "train_utts", o.train_utts);
  cfg.integer("--test-utts", "test_utts", o.test_utts);
  cfg.integer("--concat-min", "concat_min", o.concat_min);
  cfg.integer("--concat-max", "concat_max", o.concat_max);
  cfg.real("--noise-prob", "noise_prob", o.noise_prob);
  cfg.real("--snr-min", "snr_min", o.snr_min);
  cfg.real("--snr-max", "snr_max", o.snr_max);
  cfg.real("--reverb-prob", "reverb_prob", o.reverb_prob);
  cfg.finish();

  pvad::CorpusConfig c;
  c.out_dir = o.out;
  c.seed = o.seed;
  c.num_speakers = o.speakers;
  c.num_train_speakers = o.train_speakers;
  c.train_utterances = o.train_utts;
  c.test_utterances = o.test_utts;
  c.concat_min = o.concat_min;
  c.concat_max = o.concat_max;
  c.mtr = parse_on_off(o.mtr, "--mtr");
  c.noise_prob = o.noise_prob;
  c.snr_min_db = o.snr_min;
  c.snr_max_db = o.snr_max;
  c.reverb_prob = o.reverb_prob;

  const pvad::CorpusManifest m = pvad::generate_corpus(c);

  std::map<std::string, std::array<int64_t, 3>> split_counts;
  std::map<std::string, int64_t> split_records;
  for (const auto& rec : m.records) {
    const auto labels = pvad::load_labels(m.root / rec.label_path);
    auto& counts = split_counts[rec.split];
    for (pvad::PvadClass cl : labels) counts[static_cast<size_t>(cl)] += 1;
    split_records[rec.split] += 1;
  }
  std::printf("corpus written to %s\n", m.root.string().c_str());
  std::printf("speakers: %d (%d train)\n", o.speakers, o.train_speakers);
  std::printf("%-10s %8s %10s %10s %10s %10s\n", "split", "records", "frames",
              "tss", "ns", "ntss");
  for (const auto& [split, counts] : split_counts) {
    const int64_t total = counts[0] + counts[1] + counts[2];
    std::printf("%-10s %8lld %10lld %10lld %10lld %10lld\n", split.c_str(),
                static_cast<long long>(split_records[split]),
                static_cast<long long>(total), static_cast<long long>(counts[0]),
                static_cast<long long>(counts[1]),
                static_cast<long long>(counts[2]));
  }
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainOpts {
  std::string corpus;
  std::string out;
  std::string config;
  std::string arch = "et";
  std::string loss = "ce";
  double w_ns_ntss = 0.1;
  double w_tss_ns = 1.0;
  double w_tss_ntss = 1.0;
  double lr = 5e-5;
  int epochs = 4;
  int batch = 8;
  int patience = 0;
  double heldout_frac = 0.1;
  double sigma = 0.35;
  uint64_t seed = 1;
  int max_utts = 0;
  bool standard_vad = false;
};

void run_train(const CLI::App* cmd, TrainOpts o) {
  ConfigOverlay cfg(o.config, cmd);
  cfg.str("--corpus", "corpus", o.corpus);
  cfg.str("--out", "out", o.out);
  cfg.str("--arch", "arch", o.arch);
  cfg.str("--loss", "loss", o.loss);
  cfg.real("--w-ns-ntss", "w_ns_ntss", o.w_ns_ntss);
  cfg.real("--w-tss-ns", "w_tss_ns", o.w_tss_ns);
  cfg.real("--w-tss-ntss", "w_tss_ntss", o.w_tss_ntss);
  cfg.real("--lr", "lr", o.lr);
  cfg.integer("--epochs", "epochs", o.epochs);
  cfg.integer("--batch", "batch", o.batch);
  cfg.integer("--patience", "patience", o.patience);
  cfg.real("--heldout-frac", "heldout_frac", o.heldout_frac);
  cfg.real("--sigma", "sigma", o.sigma);
  cfg.unsigned64("--seed", "seed", o.seed);
  cfg.integer("--max-utts", "max_utts", o.max_utts);
  cfg.boolean("--standard-vad", "standard_vad", o.standard_vad);
  cfg.finish();

  if (o.corpus.empty()) throw pvad::UsageError("--corpus is required");

  const pvad::ArchitectureKind arch = pvad::arch_from_string(o.arch);
  if (!o.standard_vad && arch == pvad::ArchitectureKind::kSc) {
    throw pvad::UsageError(
        "SC is not trainable: it combines a frozen standard VAD with the "
        "verification score. Train its 2-class net with --standard-vad.");
  }

  pvad::TrainConfig tc;
  tc.loss = loss_from_string(o.loss);
  tc.weights.w_ns_ntss = o.w_ns_ntss;
  tc.weights.w_tss_ns = o.w_tss_ns;
  tc.weights.w_tss_ntss = o.w_tss_ntss;
  tc.adam.lr = o.lr;
  tc.epochs = o.epochs;
  tc.batch_size = o.batch;
  tc.patience = o.patience;
  tc.seed = o.seed;
  tc.log = &std::cout;

  std::cout << "train: arch=" << (o.standard_vad ? "vad" : pvad::arch_name(arch))
            << " loss=" << o.loss << " w_tss_ns=" << tc.weights.w_tss_ns
            << " w_tss_ntss=" << tc.weights.w_tss_ntss
            << " w_ns_ntss=" << tc.weights.w_ns_ntss << " lr=" << o.lr
            << " epochs=" << o.epochs << " batch=" << o.batch
            << " sigma=" << o.sigma << " seed=" << o.seed << '\n';

  const pvad::CorpusManifest manifest = pvad::load_manifest(o.corpus);
  pvad::DatasetOptions ds;
  ds.embedder.frame_noise_sigma = o.sigma;
  ds.max_utterances = o.max_utts;
  std::vector<pvad::PreparedUtterance> train =
      pvad::prepare_split(manifest, "train", ds);

  // Tail slice of the (seed-shuffled at generation) train split serves as
  // the held-out set for model selection; the test splits stay untouched.
  std::vector<pvad::PreparedUtterance> heldout;
  if (o.heldout_frac > 0.0 && train.size() >= 10) {
    const auto keep = static_cast<size_t>(
        std::llround(static_cast<double>(train.size()) * (1.0 - o.heldout_frac)));
    const size_t cut = std::clamp(keep, size_t{1}, train.size() - 1);
    heldout.assign(std::make_move_iterator(train.begin() + static_cast<long>(cut)),
                   std::make_move_iterator(train.end()));
    train.resize(cut);
  }
  const auto* held = heldout.empty() ? nullptr : &heldout;

  pvad::TrainResult result;
  pvad::ArchitectureKind file_arch = arch;
  if (o.standard_vad) {
    result = pvad::train_vad(tc, train, held);
    file_arch = pvad::ArchitectureKind::kSc;
  } else {
    result = pvad::train_pvad(arch, tc, train, held);
  }

  std::string out = o.out;
  if (out.empty()) {
    out = std::string(o.standard_vad ? "vad" : pvad::arch_name(arch)) + ".pvm";
  }
  pvad::save_model(out, file_arch, result.params, /*quantized=*/false);
  std::cout << "model written to " << out << " ("
            << pvad::param_count(result.params) << " parameters";
  if (result.best_epoch >= 0) {
    std::cout << ", best epoch " << (result.best_epoch + 1);
  }
  std::cout << ")\n";
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalOpts {
  std::string corpus;
  std::string model;
  std::string config;
  std::string mtr = "both";
  std::string trace;
  double sigma = 0.35;
  int max_utts = 0;
  bool standard_vad = false;
};

void write_trace(const std::string& path, const pvad::ScoredFrames& frames) {
  std::ofstream out(path);
  if (!out) throw pvad::IoError("cannot create trace file " + path);
  for (int64_t t = 0; t < frames.num_frames(); ++t) {
    out << t << ' ' << pvad::token_from_pvad_class(frames.labels[static_cast<size_t>(t)]);
    for (int c = 0; c < pvad::kNumPvadClasses; ++c) {
      out << ' ' << frames.scores(c, static_cast<Eigen::Index>(t));
    }
    out << '\n';
  }
}

void run_eval(const CLI::App* cmd, EvalOpts o) {
  ConfigOverlay cfg(o.config, cmd);
  cfg.str("--corpus", "corpus", o.corpus);
  cfg.str("--model", "model", o.model);
  cfg.str("--mtr", "mtr", o.mtr);
  cfg.str("--trace", "trace", o.trace);
  cfg.real("--sigma", "sigma", o.sigma);
  cfg.integer("--max-utts", "max_utts", o.max_utts);
  cfg.boolean("--standard-vad", "standard_vad", o.standard_vad);
  cfg.finish();

  if (o.corpus.empty()) throw pvad::UsageError("--corpus is required");
  if (o.model.empty()) throw pvad::UsageError("--model is required");

  const pvad::ModelFile model = pvad::load_model(o.model);
  const pvad::CorpusManifest manifest = pvad::load_manifest(o.corpus);

  std::vector<std::string> splits;
  if (o.mtr == "both") {
    splits.push_back("test");
    for (const auto& rec : manifest.records) {
      if (rec.split == "test_mtr") {
        splits.push_back("test_mtr");
        break;
      }
    }
  } else {
    splits.push_back(parse_on_off(o.mtr, "--mtr") ? "test_mtr" : "test");
  }

  pvad::DatasetOptions ds;
  ds.embedder.frame_noise_sigma = o.sigma;
  ds.max_utterances = o.max_utts;

  for (const std::string& split : splits) {
    std::vector<pvad::PreparedUtterance> utts =
        pvad::prepare_split(manifest, split, ds);

    if (o.standard_vad) {
      // Standard-VAD comparisons are defined on single-speaker recordings.
      std::erase_if(utts, [](const pvad::PreparedUtterance& u) {
        return u.num_sources != 1;
      });
      if (utts.empty()) {
        throw pvad::DataError("split '" + split +
                              "' has no single-speaker records");
      }
      pvad::BinaryScoredFrames frames;
      if (model.arch == pvad::ArchitectureKind::kSc) {
        frames = pvad::score_utterances_vad(model.params, utts);
      } else {
        frames = pvad::remap_standard_vad(
            pvad::score_utterances(model.params, model.arch, utts));
      }
      std::vector<double> ns_scores(frames.labels.size());
      std::vector<int> ns_labels(frames.labels.size());
      for (size_t t = 0; t < frames.labels.size(); ++t) {
        ns_scores[t] = frames.scores(pvad::kVadNonSpeech,
                                     static_cast<Eigen::Index>(t));
        ns_labels[t] = frames.labels[t] == pvad::kVadNonSpeech ? 1 : 0;
      }
      std::printf("split %s (%zu single-speaker utterances)\n", split.c_str(),
                  utts.size());
      std::printf("  AP(s)  %.4f\n", pvad::ap_speech(frames));
      std::printf("  AP(ns) %.4f\n",
                  pvad::average_precision(ns_scores, ns_labels));
      continue;
    }

    const pvad::ScoredFrames frames =
        pvad::score_utterances(model.params, model.arch, utts);
    const std::string echo = std::string("model=") + o.model +
                             " arch=" + pvad::arch_name(model.arch) +
                             " split=" + split;
    const pvad::EvalReport report = pvad::evaluate_frames(frames, echo);
    std::cout << report.to_text() << '\n';
    if (!o.trace.empty() && split == splits.front()) {
      write_trace(o.trace, frames);
      std::cout << "trace written to " << o.trace << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// stream
// ---------------------------------------------------------------------------

struct StreamOpts {
  std::string model;
  std::string wav;
  std::string profile;
  std::string scores_path;
  std::string corpus;
  std::string record;
  std::string trace;
  std::string config;
  double sigma = 0.35;
};

void run_stream(const CLI::App* cmd, StreamOpts o) {
  ConfigOverlay cfg(o.config, cmd);
  cfg.str("--model", "model", o.model);
  cfg.str("--wav", "wav", o.wav);
  cfg.str("--profile", "profile", o.profile);
  cfg.str("--scores", "scores", o.scores_path);
  cfg.str("--corpus", "corpus", o.corpus);
  cfg.str("--record", "record", o.record);
  cfg.str("--trace", "trace", o.trace);
  cfg.real("--sigma", "sigma", o.sigma);
  cfg.finish();

  if (o.model.empty()) throw pvad::UsageError("--model is required");
  const pvad::ModelFile model = pvad::load_model(o.model);
  const pvad::ArchitectureKind arch = model.arch;
  const bool needs_target = arch == pvad::ArchitectureKind::kEt ||
                            arch == pvad::ArchitectureKind::kSet;
  const bool needs_scores = arch != pvad::ArchitectureKind::kEt;

  // Input audio plus (depending on the architecture) conditioning inputs,
  // either from explicit files or regenerated from a corpus record.
  pvad::AudioBuffer audio;
  pvad::SpeakerEmbedding target;
  std::vector<float> scores;
  std::optional<pvad::CorpusManifest> manifest;
  const pvad::ManifestRecord* rec = nullptr;

  if (!o.record.empty()) {
    if (o.corpus.empty()) {
      throw pvad::UsageError("--record requires --corpus");
    }
    manifest = pvad::load_manifest(o.corpus);
    for (const auto& r : manifest->records) {
      if (r.id == o.record) rec = &r;
    }
    if (rec == nullptr) {
      throw pvad::DataError("record '" + o.record + "' not in manifest");
    }
  }

  if (!o.wav.empty()) {
    audio = pvad::read_wav(o.wav);
  } else if (rec != nullptr) {
    audio = pvad::read_wav(manifest->root / rec->audio_path);
  } else {
    throw pvad::UsageError("need --wav or --corpus/--record");
  }

  if (needs_target) {
    if (!o.profile.empty()) {
      target = pvad::load_profile(o.profile).embedding;
    } else if (rec != nullptr) {
      target = pvad::load_profile(
                   pvad::profile_path(manifest->root, rec->target_speaker_id))
                   .embedding;
    } else {
      throw pvad::UsageError(std::string(pvad::arch_name(arch)) +
                             " needs --profile (or --corpus/--record)");
    }
  }

  pvad::FeatureConfig fc;
  const int64_t frames = pvad::num_frames(audio.num_samples(), fc);
  if (frames < 1) throw pvad::DataError("audio is shorter than one frame");

  if (needs_scores) {
    if (!o.scores_path.empty()) {
      std::ifstream in(o.scores_path);
      if (!in) throw pvad::IoError("cannot open " + o.scores_path);
      float v = 0.0f;
      while (in >> v) scores.push_back(v);
      if (static_cast<int64_t>(scores.size()) != frames) {
        throw pvad::DataError("scores file has " +
                              std::to_string(scores.size()) + " entries, audio has " +
                              std::to_string(frames) + " frames");
      }
    } else if (rec != nullptr) {
      const pvad::ConcatUtterance clean = pvad::rebuild_clean(*manifest, *rec);
      pvad::SpeakerEmbedding rec_target =
          pvad::load_profile(
              pvad::profile_path(manifest->root, rec->target_speaker_id))
              .embedding;
      pvad::EmbedderConfig ec;
      ec.frame_noise_sigma = o.sigma;
      scores = pvad::record_frame_scores(*manifest, *rec, clean, rec_target, ec);
    } else {
      throw pvad::UsageError(std::string(pvad::arch_name(arch)) +
                             " needs per-frame scores: --scores <file> or "
                             "--corpus/--record");
    }
  }

  pvad::FeatureExtractor extractor(fc);
  pvad::StreamState state =
      pvad::make_stream_state(model.params, arch, needs_target ? &target : nullptr);

  std::ofstream trace_file;
  std::ostream* trace = &std::cout;
  if (!o.trace.empty()) {
    trace_file.open(o.trace);
    if (!trace_file) throw pvad::IoError("cannot create " + o.trace);
    trace = &trace_file;
  }

  const int width = fc.frame_width_samples();
  const int step = fc.frame_step_samples();
  std::vector<double> latency_ms;
  latency_ms.reserve(static_cast<size_t>(frames));
  const char* names[3] = {"tss", "ns", "ntss"};

  for (int64_t t = 0; t < frames; ++t) {
    const auto begin = std::chrono::steady_clock::now();
    const std::span<const float> window(audio.samples.data() + t * step,
                                        static_cast<size_t>(width));
    const Eigen::VectorXf feats = extractor.extract_frame(window);
    const float* s =
        needs_scores ? &scores[static_cast<size_t>(t)] : nullptr;
    const Eigen::Vector3f probs = pvad::stream_step(model.params, state, feats, s);
    const auto end = std::chrono::steady_clock::now();
    latency_ms.push_back(
        std::chrono::duration<double, std::milli>(end - begin).count());

    int best = 0;
    probs.maxCoeff(&best);
    char line[128];
    std::snprintf(line, sizeof(line), "%8.2f %-4s %.4f %.4f %.4f\n",
                  static_cast<double>(t) * fc.frame_step_ms, names[best],
                  static_cast<double>(probs(0)), static_cast<double>(probs(1)),
                  static_cast<double>(probs(2)));
    *trace << line;
  }

  std::printf("frames: %lld\n", static_cast<long long>(frames));
  std::printf("latency ms/frame: p50 %.4f  p95 %.4f  p99 %.4f\n",
              percentile(latency_ms, 0.50), percentile(latency_ms, 0.95),
              percentile(latency_ms, 0.99));
}

// ---------------------------------------------------------------------------
// quantize / inspect
// ---------------------------------------------------------------------------

struct QuantizeOpts {
  std::string model;
  std::string out;
  std::string corpus;
  std::string config;
  double sigma = 0.35;
  int max_utts = 0;
};

void run_quantize(const CLI::App* cmd, QuantizeOpts o) {
  ConfigOverlay cfg(o.config, cmd);
  cfg.str("--model", "model", o.model);
  cfg.str("--out", "out", o.out);
  cfg.str("--corpus", "corpus", o.corpus);
  cfg.real("--sigma", "sigma", o.sigma);
  cfg.integer("--max-utts", "max_utts", o.max_utts);
  cfg.finish();

  if (o.model.empty()) throw pvad::UsageError("--model is required");
  const pvad::ModelFile model = pvad::load_model(o.model);
  std::string out = o.out.empty() ? o.model + ".q8" : o.out;
  pvad::save_model(out, model.arch, model.params, /*quantized=*/true);
  const auto bytes = std::filesystem::file_size(out);
  std::printf("quantized model written to %s (%llu bytes)\n", out.c_str(),
              static_cast<unsigned long long>(bytes));

  if (!o.corpus.empty()) {
    const pvad::CorpusManifest manifest = pvad::load_manifest(o.corpus);
    pvad::DatasetOptions ds;
    ds.embedder.frame_noise_sigma = o.sigma;
    ds.max_utterances = o.max_utts;
    const auto utts = pvad::prepare_split(manifest, "test", ds);
    const pvad::QuantDeltaReport delta =
        pvad::quantized_inference_delta(model.params, model.arch, utts);
    std::cout << delta.to_text();
  }
}

struct InspectOpts {
  std::string model;
  std::string config;
};

void run_inspect(const CLI::App* cmd, InspectOpts o) {
  ConfigOverlay cfg(o.config, cmd);
  cfg.str("--model", "model", o.model);
  cfg.finish();
  if (o.model.empty()) throw pvad::UsageError("--model is required");

  const pvad::ModelFile model = pvad::load_model(o.model);
  const auto bytes = std::filesystem::file_size(o.model);
  std::printf("file:        %s (%llu bytes)\n", o.model.c_str(),
              static_cast<unsigned long long>(bytes));
  std::printf("architecture: %s\n", pvad::arch_name(model.arch));
  std::printf("quantized:   %s\n", model.quantized ? "yes" : "no");
  std::printf("input dim:   %d\n", model.params.input_dim());
  std::printf("hidden dim:  %d\n", model.params.hidden_dim());
  std::printf("fc dim:      %d\n", model.params.fc_dim());
  std::printf("classes:     %d\n", model.params.num_classes());
  std::printf("parameters:  %lld\n",
              static_cast<long long>(pvad::param_count(model.params)));
}

// ---------------------------------------------------------------------------
// reproduce
// ---------------------------------------------------------------------------

struct ReproduceOpts {
  std::string out = "repro";
  std::string config;
  uint64_t seed = 1;
  int speakers = 20;
  int train_speakers = 14;
  int train_utts = 2000;
  int test_utts = 500;
  int epochs = 2;
  double lr = 1.5e-3;
  double sigma = 0.35;
};

void run_reproduce(const CLI::App* cmd, ReproduceOpts o) {
  ConfigOverlay cfg(o.config, cmd);
  cfg.str("--out", "out", o.out);
  cfg.unsigned64("--seed", "seed", o.seed);
  cfg.integer("--speakers", "speakers", o.speakers);
  cfg.integer("--train-speakers", "train_speakers", o.train_speakers);
  cfg.integer("--train-utts", "train_utts", o.train_utts);
  cfg.integer("--test-utts", "test_utts", o.test_utts);
  cfg.integer("--epochs", "epochs", o.epochs);
  cfg.real("--lr", "lr", o.lr);
  cfg.real("--sigma", "sigma", o.sigma);
  cfg.finish();

  namespace fs = std::filesystem;
  const fs::path root = o.out;
  const fs::path corpus_dir = root / "corpus";
  fs::create_directories(root);

  if (!fs::exists(corpus_dir / "manifest.jsonl")) {
    pvad::CorpusConfig c;
    c.out_dir = corpus_dir;
    c.seed = o.seed;
    c.num_speakers = o.speakers;
    c.num_train_speakers = o.train_speakers;
    c.train_utterances = o.train_utts;
    c.test_utterances = o.test_utts;
    std::cout << "synthesizing corpus in " << corpus_dir.string() << "\n";
    pvad::generate_corpus(c);
  } else {
    std::cout << "reusing corpus in " << corpus_dir.string() << "\n";
  }

  const pvad::CorpusManifest manifest = pvad::load_manifest(corpus_dir);
  pvad::DatasetOptions ds;
  ds.embedder.frame_noise_sigma = o.sigma;
  std::cout << "preparing splits\n";
  std::vector<pvad::PreparedUtterance> train =
      pvad::prepare_split(manifest, "train", ds);
  const auto test = pvad::prepare_split(manifest, "test", ds);
  const auto test_mtr = pvad::prepare_split(manifest, "test_mtr", ds);

  pvad::TrainConfig tc;
  tc.adam.lr = o.lr;
  tc.epochs = o.epochs;
  tc.seed = o.seed;
  tc.log = &std::cout;

  struct Row {
    std::string name;
    double ap_tss_clean, ap_tss_mtr, map_clean, map_mtr;
  };
  std::vector<Row> rows;

  auto eval_pvad = [&](const pvad::NetworkParams<float>& params,
                       pvad::ArchitectureKind arch, const std::string& name) {
    const auto clean = pvad::evaluate_frames(
        pvad::score_utterances(params, arch, test), name + " clean");
    const auto mtr = pvad::evaluate_frames(
        pvad::score_utterances(params, arch, test_mtr), name + " mtr");
    rows.push_back({name, clean.ap_tss, mtr.ap_tss, clean.micro_map,
                    mtr.micro_map});
  };

  std::cout << "training standard VAD (SC baseline)\n";
  pvad::TrainConfig vad_tc = tc;
  const pvad::TrainResult vad = pvad::train_vad(vad_tc, train, nullptr);
  pvad::save_model(root / "vad.pvm", pvad::ArchitectureKind::kSc, vad.params,
                   false);
  eval_pvad(vad.params, pvad::ArchitectureKind::kSc, "SC");

  const pvad::ArchitectureKind archs[] = {pvad::ArchitectureKind::kSt,
                                          pvad::ArchitectureKind::kEt,
                                          pvad::ArchitectureKind::kSet};
  const pvad::LossKind losses[] = {pvad::LossKind::kCrossEntropy,
                                   pvad::LossKind::kWeightedPairwise};
  for (const auto arch : archs) {
    for (const auto loss : losses) {
      pvad::TrainConfig ptc = tc;
      ptc.loss = loss;
      const std::string tag =
          std::string(pvad::arch_name(arch)) +
          (loss == pvad::LossKind::kCrossEntropy ? "+ce" : "+wpl");
      std::cout << "training " << tag << "\n";
      const pvad::TrainResult r = pvad::train_pvad(arch, ptc, train, nullptr);
      pvad::save_model(root / (tag + ".pvm"), arch, r.params, false);
      eval_pvad(r.params, arch, tag);
    }
  }

  std::printf("%-10s %14s %12s %11s %9s\n", "model", "AP(tss) clean",
              "AP(tss) mtr", "mAP clean", "mAP mtr");
  for (const Row& r : rows) {
    std::printf("%-10s %14.4f %12.4f %11.4f %9.4f\n", r.name.c_str(),
                r.ap_tss_clean, r.ap_tss_mtr, r.map_clean, r.map_mtr);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Personal voice activity detection: synthetic corpus, "
               "training, evaluation, streaming"};
  app.require_subcommand(1);

  SynthOpts synth;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "Generate the synthetic speech corpus");
  synth_cmd->add_option("--out", synth.out, "Corpus output directory");
  synth_cmd->add_option("--seed", synth.seed, "Corpus seed");
  synth_cmd->add_option("--mtr", synth.mtr, "Augment training data (on|off)");
  synth_cmd->add_option("--speakers", synth.speakers, "Total speakers");
  synth_cmd->add_option("--train-speakers", synth.train_speakers,
                        "Speakers reserved for training");
  synth_cmd->add_option("--train-utts", synth.train_utts, "Training utterances");
  synth_cmd->add_option("--test-utts", synth.test_utts, "Test utterances");
  synth_cmd->add_option("--concat-min", synth.concat_min,
                        "Min sources per utterance");
  synth_cmd->add_option("--concat-max", synth.concat_max,
                        "Max sources per utterance");
  synth_cmd->add_option("--noise-prob", synth.noise_prob,
                        "Probability of noise on a train utterance");
  synth_cmd->add_option("--snr-min", synth.snr_min, "Min SNR dB");
  synth_cmd->add_option("--snr-max", synth.snr_max, "Max SNR dB");
  synth_cmd->add_option("--reverb-prob", synth.reverb_prob,
                        "Probability of reverb on an augmented utterance");
  synth_cmd->add_option("--config", synth.config, "JSON config file");
  synth_cmd->callback([&] { run_synth(synth_cmd, synth); });

  TrainOpts train;
  CLI::App* train_cmd = app.add_subcommand("train", "Train a model");
  train_cmd->add_option("--corpus", train.corpus, "Corpus directory");
  train_cmd->add_option("--out", train.out, "Model output path");
  train_cmd->add_option("--arch", train.arch, "Architecture (sc|st|et|set)");
  train_cmd->add_option("--loss", train.loss, "Loss (ce|wpl)");
  train_cmd->add_option("--w-ns-ntss", train.w_ns_ntss, "WPL ns/ntss weight");
  train_cmd->add_option("--w-tss-ns", train.w_tss_ns, "WPL tss/ns weight");
  train_cmd->add_option("--w-tss-ntss", train.w_tss_ntss, "WPL tss/ntss weight");
  train_cmd->add_option("--lr", train.lr, "Adam learning rate");
  train_cmd->add_option("--epochs", train.epochs, "Training epochs");
  train_cmd->add_option("--batch", train.batch, "Utterances per batch");
  train_cmd->add_option("--patience", train.patience,
                        "Early-stop patience in epochs (0 = off)");
  train_cmd->add_option("--heldout-frac", train.heldout_frac,
                        "Train fraction held out for model selection");
  train_cmd->add_option("--sigma", train.sigma, "Embedder noise sigma");
  train_cmd->add_option("--seed", train.seed, "Training seed");
  train_cmd->add_option("--max-utts", train.max_utts,
                        "Cap on training utterances (0 = all)");
  train_cmd->add_flag("--standard-vad", train.standard_vad,
                      "Train the 2-class standard VAD net");
  train_cmd->add_option("--config", train.config, "JSON config file");
  train_cmd->callback([&] { run_train(train_cmd, train); });

  EvalOpts eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a model");
  eval_cmd->add_option("--corpus", eval.corpus, "Corpus directory");
  eval_cmd->add_option("--model", eval.model, "Model file");
  eval_cmd->add_option("--mtr", eval.mtr,
                       "Test split: on = MTR, off = clean, both");
  eval_cmd->add_option("--trace", eval.trace, "Per-frame score dump file");
  eval_cmd->add_option("--sigma", eval.sigma, "Embedder noise sigma");
  eval_cmd->add_option("--max-utts", eval.max_utts,
                       "Cap on eval utterances (0 = all)");
  eval_cmd->add_flag("--standard-vad", eval.standard_vad,
                     "2-class speech/non-speech evaluation on "
                     "single-speaker records");
  eval_cmd->add_option("--config", eval.config, "JSON config file");
  eval_cmd->callback([&] { run_eval(eval_cmd, eval); });

  StreamOpts stream;
  CLI::App* stream_cmd =
      app.add_subcommand("stream", "Frame-by-frame streaming inference");
  stream_cmd->add_option("--model", stream.model, "Model file");
  stream_cmd->add_option("--wav", stream.wav, "Input WAV (16 kHz mono PCM16)");
  stream_cmd->add_option("--profile", stream.profile,
                         "Enrollment profile (et/set)");
  stream_cmd->add_option("--scores", stream.scores_path,
                         "Per-frame verification scores, one per line");
  stream_cmd->add_option("--corpus", stream.corpus,
                         "Corpus directory (with --record)");
  stream_cmd->add_option("--record", stream.record,
                         "Corpus record id supplying audio/conditioning");
  stream_cmd->add_option("--trace", stream.trace, "Trace output file");
  stream_cmd->add_option("--sigma", stream.sigma, "Embedder noise sigma");
  stream_cmd->add_option("--config", stream.config, "JSON config file");
  stream_cmd->callback([&] { run_stream(stream_cmd, stream); });

  QuantizeOpts quant;
  CLI::App* quant_cmd =
      app.add_subcommand("quantize", "Write an 8-bit weight model file");
  quant_cmd->add_option("--model", quant.model, "Input model file");
  quant_cmd->add_option("--out", quant.out, "Output path (default: +.q8)");
  quant_cmd->add_option("--corpus", quant.corpus,
                        "Corpus for the AP delta report");
  quant_cmd->add_option("--sigma", quant.sigma, "Embedder noise sigma");
  quant_cmd->add_option("--max-utts", quant.max_utts,
                        "Cap on delta-report utterances (0 = all)");
  quant_cmd->add_option("--config", quant.config, "JSON config file");
  quant_cmd->callback([&] { run_quantize(quant_cmd, quant); });

  InspectOpts inspect;
  CLI::App* inspect_cmd =
      app.add_subcommand("inspect", "Print a model file's header");
  inspect_cmd->add_option("--model", inspect.model, "Model file");
  inspect_cmd->add_option("--config", inspect.config, "JSON config file");
  inspect_cmd->callback([&] { run_inspect(inspect_cmd, inspect); });

  ReproduceOpts repro;
  CLI::App* repro_cmd = app.add_subcommand(
      "reproduce", "Synth + train all architectures + comparison table");
  repro_cmd->add_option("--out", repro.out, "Working directory");
  repro_cmd->add_option("--seed", repro.seed, "Seed");
  repro_cmd->add_option("--speakers", repro.speakers, "Total speakers");
  repro_cmd->add_option("--train-speakers", repro.train_speakers,
                        "Speakers reserved for training");
  repro_cmd->add_option("--train-utts", repro.train_utts, "Training utterances");
  repro_cmd->add_option("--test-utts", repro.test_utts, "Test utterances");
  repro_cmd->add_option("--epochs", repro.epochs, "Epochs per model");
  repro_cmd->add_option("--lr", repro.lr,
                        "Learning rate (default tuned for this corpus scale)");
  repro_cmd->add_option("--sigma", repro.sigma, "Embedder noise sigma");
  repro_cmd->add_option("--config", repro.config, "JSON config file");
  repro_cmd->callback([&] { run_reproduce(repro_cmd, repro); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const pvad::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const pvad::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const pvad::ShapeError& e) {
    std::cerr << "shape error: " << e.what() << '\n';
    return kExitData;
  } catch (const pvad::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const pvad::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
