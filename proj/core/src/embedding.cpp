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

#include "pvad/embedding.hpp"

#include <fstream>
#include <sstream>

#include "pvad/errors.hpp"

namespace pvad {

void EmbedderConfig::validate() const {
  if (frame_noise_sigma < 0.0) {
    throw ConfigError("embedder: frame_noise_sigma must be >= 0");
  }
  if (window_frames < 1 || window_step_frames < 1) {
    throw ConfigError("embedder: window sizes must be >= 1");
  }
}

SpeakerEmbedding aggregate_windows(
    const std::vector<SpeakerEmbedding>& embeddings) {
  if (embeddings.empty()) {
    throw DataError("aggregate_windows: empty embedding list");
  }
  Eigen::VectorXf mean = Eigen::VectorXf::Zero(embeddings.front().size());
  for (const auto& e : embeddings) {
    if (e.size() != mean.size()) {
      throw ShapeError("aggregate_windows: mixed embedding dimensions");
    }
    mean += e;
  }
  mean /= static_cast<float>(embeddings.size());
  return normalized(mean);
}

EnrollmentProfile enroll(
    const std::string& speaker_id,
    const std::vector<std::vector<SpeakerEmbedding>>& utterance_frame_embeddings,
    const std::vector<std::string>& source_utterance_ids) {
  if (utterance_frame_embeddings.empty()) {
    throw DataError("enroll: need at least one utterance");
  }
  std::vector<SpeakerEmbedding> per_utt;
  per_utt.reserve(utterance_frame_embeddings.size());
  for (const auto& frames : utterance_frame_embeddings) {
    per_utt.push_back(aggregate_windows(frames));
  }
  EnrollmentProfile p;
  p.speaker_id = speaker_id;
  p.embedding = aggregate_windows(per_utt);
  p.source_utterance_ids = source_utterance_ids;
  return p;
}

SpeakerEmbedding oracle_frame_embedding(const Eigen::VectorXf* voice_point,
                                        double sigma, Rng& rng) {
  Eigen::VectorXf e(kEmbeddingDim);
  if (voice_point == nullptr) {
    for (int i = 0; i < kEmbeddingDim; ++i) {
      e(i) = static_cast<float>(rng.gaussian());
    }
    return normalized(e);
  }
  if (voice_point->size() != kEmbeddingDim) {
    throw ShapeError("oracle_frame_embedding: bad voice point dimension");
  }
  if (sigma == 0.0) return normalized(*voice_point);
  for (int i = 0; i < kEmbeddingDim; ++i) {
    e(i) = (*voice_point)(i) + static_cast<float>(sigma * rng.gaussian());
  }
  return normalized(e);
}

EnrollmentProfile enroll_synthetic(const SyntheticSpeaker& speaker,
                                   int num_utterances, int frames_per_utterance,
                                   double frame_noise_sigma, Rng& rng) {
  if (num_utterances < 1 || frames_per_utterance < 1) {
    throw ConfigError("enroll_synthetic: counts must be >= 1");
  }
  std::vector<std::vector<SpeakerEmbedding>> utts(
      static_cast<size_t>(num_utterances));
  std::vector<std::string> ids;
  for (int u = 0; u < num_utterances; ++u) {
    auto& frames = utts[static_cast<size_t>(u)];
    frames.reserve(static_cast<size_t>(frames_per_utterance));
    for (int f = 0; f < frames_per_utterance; ++f) {
      frames.push_back(
          oracle_frame_embedding(&speaker.voice_point, frame_noise_sigma, rng));
    }
    ids.push_back(speaker.speaker_id + "/enroll-" + std::to_string(u));
  }
  return enroll(speaker.speaker_id, utts, ids);
}

std::vector<float> frame_scores(const std::vector<int>& frame_speaker,
                                const std::vector<Eigen::VectorXf>& voice_points,
                                const SpeakerEmbedding& target,
                                const EmbedderConfig& cfg, Rng& rng) {
  cfg.validate();
  if (target.size() != kEmbeddingDim) {
    throw ShapeError("frame_scores: bad target embedding dimension");
  }
  const int T = static_cast<int>(frame_speaker.size());
  std::vector<SpeakerEmbedding> raw;
  raw.reserve(static_cast<size_t>(T));
  for (int t = 0; t < T; ++t) {
    const int spk = frame_speaker[static_cast<size_t>(t)];
    const Eigen::VectorXf* vp = nullptr;
    if (spk >= 0) {
      if (spk >= static_cast<int>(voice_points.size())) {
        throw DataError("frame_scores: frame " + std::to_string(t) +
                        " references unknown speaker index " +
                        std::to_string(spk));
      }
      vp = &voice_points[static_cast<size_t>(spk)];
    }
    raw.push_back(oracle_frame_embedding(vp, cfg.frame_noise_sigma, rng));
  }

  std::vector<float> scores(static_cast<size_t>(T));
  if (cfg.window_frames == 1 && cfg.window_step_frames == 1) {
    for (int t = 0; t < T; ++t) {
      scores[static_cast<size_t>(t)] = cosine(raw[static_cast<size_t>(t)], target);
    }
    return scores;
  }

  // Window mode: the verifier refreshes every window_step_frames frames,
  // each refresh aggregating the trailing window_frames raw embeddings.
  SpeakerEmbedding current;
  for (int t = 0; t < T; ++t) {
    if (t % cfg.window_step_frames == 0 || current.size() == 0) {
      const int lo = std::max(0, t - cfg.window_frames + 1);
      std::vector<SpeakerEmbedding> window(raw.begin() + lo,
                                           raw.begin() + t + 1);
      current = aggregate_windows(window);
    }
    scores[static_cast<size_t>(t)] = cosine(current, target);
  }
  return scores;
}

void save_profile(const std::filesystem::path& path,
                  const EnrollmentProfile& profile) {
  if (profile.embedding.size() != kEmbeddingDim) {
    throw ShapeError("save_profile: embedding must be " +
                     std::to_string(kEmbeddingDim) + "-dim");
  }
  std::ofstream out(path);
  if (!out) throw IoError("save_profile: cannot open " + path.string());
  out << profile.speaker_id << "\n";
  out.precision(9);
  for (int i = 0; i < profile.embedding.size(); ++i) {
    if (i > 0) out << ' ';
    out << profile.embedding(i);
  }
  out << "\n";
  if (!out) throw IoError("save_profile: write failed for " + path.string());
}

EnrollmentProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_profile: cannot open " + path.string());
  EnrollmentProfile p;
  if (!std::getline(in, p.speaker_id) || p.speaker_id.empty()) {
    throw DataError("load_profile: missing speaker id line in " +
                    path.string());
  }
  std::string values_line;
  if (!std::getline(in, values_line)) {
    throw DataError("load_profile: missing embedding line in " + path.string());
  }
  std::istringstream vs(values_line);
  p.embedding.resize(kEmbeddingDim);
  for (int i = 0; i < kEmbeddingDim; ++i) {
    if (!(vs >> p.embedding(i))) {
      throw DataError("load_profile: expected " +
                      std::to_string(kEmbeddingDim) + " floats in " +
                      path.string());
    }
  }
  float extra;
  if (vs >> extra) {
    throw DataError("load_profile: more than " +
                    std::to_string(kEmbeddingDim) + " floats in " +
                    path.string());
  }
  const float n = p.embedding.norm();
  if (!(std::abs(n - 1.0f) < 1e-3f)) {
    throw DataError("load_profile: embedding in " + path.string() +
                    " is not unit norm");
  }
  p.embedding = normalized(p.embedding);
  return p;
}

}  // namespace pvad
