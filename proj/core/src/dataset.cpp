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

#include "pvad/dataset.hpp"

#include <unordered_map>

#include "pvad/audio.hpp"
#include "pvad/errors.hpp"

namespace pvad {

std::vector<PreparedUtterance> prepare_split(const CorpusManifest& manifest,
                                             const std::string& split,
                                             const DatasetOptions& opts) {
  opts.embedder.validate();
  opts.features.validate();
  FeatureExtractor extractor(opts.features);

  std::unordered_map<std::string, SpeakerEmbedding> profiles;
  auto target_embedding = [&](const std::string& id) -> const SpeakerEmbedding& {
    auto it = profiles.find(id);
    if (it == profiles.end()) {
      EnrollmentProfile p = load_profile(profile_path(manifest.root, id));
      it = profiles.emplace(id, std::move(p.embedding)).first;
    }
    return it->second;
  };

  std::vector<PreparedUtterance> out;
  for (const ManifestRecord* rec : manifest.split_records(split)) {
    if (opts.max_utterances > 0 &&
        static_cast<int>(out.size()) >= opts.max_utterances) {
      break;
    }
    PreparedUtterance u;
    u.id = rec->id;
    u.split = rec->split;
    u.num_sources = static_cast<int>(rec->sources.size());

    const AudioBuffer audio = read_wav(manifest.root / rec->audio_path);
    u.features = extractor.extract(audio);
    u.labels = load_labels(manifest.root / rec->label_path);
    if (static_cast<Eigen::Index>(u.labels.size()) != u.features.cols()) {
      throw DataError(rec->id + ": label count " +
                      std::to_string(u.labels.size()) + " != frame count " +
                      std::to_string(u.features.cols()));
    }

    // Frame attribution (who speaks when) is not stored on disk; the clean
    // signal regenerates deterministically from the manifest seeds.
    const ConcatUtterance clean = rebuild_clean(manifest, *rec);
    if (clean.num_frames() != static_cast<int64_t>(u.labels.size())) {
      throw DataError(rec->id + ": regenerated frame count mismatch");
    }
    u.target = target_embedding(rec->target_speaker_id);
    u.scores =
        record_frame_scores(manifest, *rec, clean, u.target, opts.embedder);
    out.push_back(std::move(u));
  }
  if (out.empty()) {
    throw DataError("split '" + split + "' has no records");
  }
  return out;
}

ScoredFrames score_utterances(const NetworkParams<float>& net,
                              ArchitectureKind arch,
                              const std::vector<PreparedUtterance>& utts) {
  ScoredFrames pool;
  for (const PreparedUtterance& u : utts) {
    const bool needs_target =
        arch == ArchitectureKind::kEt || arch == ArchitectureKind::kSet;
    const bool needs_scores = arch != ArchitectureKind::kEt;
    const PvadScores scored =
        pvad_forward(net, arch, u.features, needs_target ? &u.target : nullptr,
                     needs_scores ? &u.scores : nullptr);
    append_frames(pool, scored.scores, u.labels);
  }
  return pool;
}

BinaryScoredFrames score_utterances_vad(const NetworkParams<float>& net,
                                        const std::vector<PreparedUtterance>& utts) {
  if (net.num_classes() != 2) {
    throw ShapeError("score_utterances_vad: expected a 2-class net, got " +
                     std::to_string(net.num_classes()) + " classes");
  }
  BinaryScoredFrames pool;
  std::vector<Eigen::MatrixXf> chunks;
  Eigen::Index total = 0;
  for (const PreparedUtterance& u : utts) {
    const Eigen::MatrixXf logits = forward_sequence(net, u.features);
    Eigen::MatrixXf probs(2, logits.cols());
    for (Eigen::Index t = 0; t < logits.cols(); ++t) {
      probs.col(t) = softmax<float>(logits.col(t));
    }
    total += probs.cols();
    chunks.push_back(std::move(probs));
    const std::vector<int> vad = collapse_to_vad_labels(u.labels);
    pool.labels.insert(pool.labels.end(), vad.begin(), vad.end());
  }
  pool.scores.resize(2, total);
  Eigen::Index at = 0;
  for (const auto& c : chunks) {
    pool.scores.middleCols(at, c.cols()) = c;
    at += c.cols();
  }
  return pool;
}

std::vector<int> collapse_to_vad_labels(const std::vector<PvadClass>& labels) {
  std::vector<int> out(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    out[i] = labels[i] == PvadClass::kNs ? kVadNonSpeech : kVadSpeech;
  }
  return out;
}

}  // namespace pvad
