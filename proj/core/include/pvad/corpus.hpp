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
#include <optional>
#include <string>
#include <vector>

#include "pvad/synth.hpp"

namespace pvad {

struct CorpusConfig {
  std::filesystem::path out_dir;
  uint64_t seed = 1;

  int num_speakers = 20;
  int num_train_speakers = 14;
  int train_utterances = 2000;
  int test_utterances = 500;

  // Number of concatenated sources per utterance: uniform on [a, b].
  int concat_min = 1;
  int concat_max = 3;
  double source_duration_min_s = 1.1;
  double source_duration_max_s = 2.2;

  // Multistyle augmentation. When on, training records are augmented and
  // a second "test_mtr" copy of the test set is produced.
  bool mtr = true;
  double noise_prob = 0.9;
  double snr_min_db = 0.0;
  double snr_max_db = 30.0;
  double reverb_prob = 0.5;
  double reverb_decay_min_ms = 80.0;
  double reverb_decay_max_ms = 400.0;

  // Enrollment simulation written alongside the corpus.
  int enroll_utterances = 6;
  int enroll_frames = 100;
  double enroll_sigma = 0.1;

  void validate() const;
};

struct SourceSpec {
  std::string speaker_id;
  double duration_s = 0.0;
  uint64_t seed = 0;
};

struct ManifestRecord {
  std::string id;
  std::string split;  // train | test | test_mtr
  std::string audio_path;  // relative to corpus root
  std::string label_path;
  std::string target_speaker_id;
  std::vector<SourceSpec> sources;
  std::optional<AugmentSpec> augment;
  uint64_t seed = 0;  // per-record stream seed (embedder scores etc.)
};

struct CorpusManifest {
  std::filesystem::path root;
  std::vector<ManifestRecord> records;
  std::vector<SyntheticSpeaker> speakers;
  std::map<std::string, std::string> speaker_split;  // id -> train|test

  const SyntheticSpeaker& speaker(const std::string& id) const;
  std::vector<const ManifestRecord*> split_records(const std::string& split) const;
};

/// Generates audio, labels, enrollment profiles, the speaker registry and
/// the manifest under cfg.out_dir. Pure function of (cfg, cfg.seed).
CorpusManifest generate_corpus(const CorpusConfig& cfg);

CorpusManifest load_manifest(const std::filesystem::path& corpus_root);

void save_labels(const std::filesystem::path& path,
                 const std::vector<PvadClass>& labels);
std::vector<PvadClass> load_labels(const std::filesystem::path& path);

/// Rebuilds a record's clean concatenated utterance from its manifest
/// source specs (no augmentation).
ConcatUtterance rebuild_clean(const CorpusManifest& manifest,
                              const ManifestRecord& rec);

/// Rebuilds the record exactly as written to disk (with augmentation).
ConcatUtterance rebuild_record(const CorpusManifest& manifest,
                               const ManifestRecord& rec);

struct ValidationReport {
  int records_checked = 0;
  std::vector<std::string> problems;
  bool ok() const { return problems.empty(); }
};

/// Re-derives every record and checks: label/frame-count agreement,
/// audio byte-identity with the WAV on disk, split speaker disjointness,
/// target presence (>= 1 tss frame), and SNR re-measurement within
/// +/- 0.1 dB from the regenerated signal and noise components.
ValidationReport validate_corpus(const CorpusManifest& manifest);

/// Per-frame oracle verification scores for a record, deterministic in
/// (record seed, embedder config).
std::vector<float> record_frame_scores(const CorpusManifest& manifest,
                                       const ManifestRecord& rec,
                                       const ConcatUtterance& utt,
                                       const SpeakerEmbedding& target,
                                       const EmbedderConfig& cfg);

std::filesystem::path profile_path(const std::filesystem::path& corpus_root,
                                   const std::string& speaker_id);

}  // namespace pvad
