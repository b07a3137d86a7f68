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
#include <string>
#include <vector>

#include "pvad/voice_space.hpp"

namespace pvad {

/// 256-dim unit-norm speaker identity vector.
using SpeakerEmbedding = Eigen::VectorXf;

struct EnrollmentProfile {
  std::string speaker_id;
  SpeakerEmbedding embedding;
  std::vector<std::string> source_utterance_ids;
};

/// A speaker in the synthetic world: the ground-truth identity vector the
/// oracle embedder reports, plus a seed for per-speaker audio
/// idiosyncrasies beyond the identity-derived timbre.
struct SyntheticSpeaker {
  std::string speaker_id;
  Eigen::VectorXf voice_point;  // kEmbeddingDim, unit norm
  uint64_t timbre_seed = 0;
};

/// Controls how degraded the oracle verifier is. sigma is the std-dev of
/// the per-frame gaussian perturbation added to the true voice point
/// before renormalizing; window mode aggregates raw frame embeddings over
/// a trailing window updated every window_step_frames frames.
struct EmbedderConfig {
  double frame_noise_sigma = 0.35;
  int window_frames = 1;
  int window_step_frames = 1;

  void validate() const;
};

/// L2-normalized arithmetic mean. Throws on an empty list or a zero mean.
SpeakerEmbedding aggregate_windows(const std::vector<SpeakerEmbedding>& embeddings);

/// Per-utterance aggregation, then aggregation across utterances.
EnrollmentProfile enroll(
    const std::string& speaker_id,
    const std::vector<std::vector<SpeakerEmbedding>>& utterance_frame_embeddings,
    const std::vector<std::string>& source_utterance_ids = {});

/// Simulates enrollment audio for a synthetic speaker: num_utterances
/// recordings of frames_per_utterance speech frames each, observed through
/// the oracle embedder at the given noise level.
EnrollmentProfile enroll_synthetic(const SyntheticSpeaker& speaker,
                                   int num_utterances, int frames_per_utterance,
                                   double frame_noise_sigma, Rng& rng);

/// One oracle frame embedding: normalize(voice_point + gaussian(sigma)) for
/// speech, a random unit vector for non-speech (voice_point == nullptr).
SpeakerEmbedding oracle_frame_embedding(const Eigen::VectorXf* voice_point,
                                        double sigma, Rng& rng);

/// Per-frame verification scores s_t = cosine(e_t, target) in [-1, 1].
/// frame_speaker holds, per frame, an index into voice_points or -1 for
/// non-speech. In window mode e_t is the aggregate of the trailing raw
/// embeddings, refreshed every window_step_frames frames.
std::vector<float> frame_scores(const std::vector<int>& frame_speaker,
                                const std::vector<Eigen::VectorXf>& voice_points,
                                const SpeakerEmbedding& target,
                                const EmbedderConfig& cfg, Rng& rng);

/// Text profile format: first line the speaker id, second line 256
/// space-separated floats.
void save_profile(const std::filesystem::path& path,
                  const EnrollmentProfile& profile);
EnrollmentProfile load_profile(const std::filesystem::path& path);

}  // namespace pvad
