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

#include <optional>
#include <string>

#include "pvad/embedding.hpp"
#include "pvad/nn.hpp"

namespace pvad {

/// Canonical class order for every 3-class logit/score vector.
enum class PvadClass : int { kTss = 0, kNs = 1, kNtss = 2 };

inline constexpr int kNumPvadClasses = 3;

/// 2-class standard VAD order: speech first, then non-speech.
inline constexpr int kVadSpeech = 0;
inline constexpr int kVadNonSpeech = 1;

PvadClass pvad_class_from_token(const std::string& token);  // ns|tss|ntss
const char* token_from_pvad_class(PvadClass c);

/// SC: frozen 2-class VAD combined with the verification score.
/// ST: score appended to the features (41-dim input).
/// ET: target embedding appended (296-dim).
/// SET: both (297-dim).
enum class ArchitectureKind { kSc, kSt, kEt, kSet };

ArchitectureKind arch_from_string(const std::string& name);  // usage error
const char* arch_name(ArchitectureKind arch);

/// Input width of the network backing the architecture.
int arch_input_dim(ArchitectureKind arch, int feature_dim = 40);
/// 2 for the SC baseline's VAD net, 3 otherwise.
int arch_num_classes(ArchitectureKind arch);

Eigen::VectorXf build_input_st(const Eigen::Ref<const Eigen::VectorXf>& x_t,
                               float s_t);
Eigen::VectorXf build_input_et(const Eigen::Ref<const Eigen::VectorXf>& x_t,
                               const SpeakerEmbedding& e_target);
Eigen::VectorXf build_input_set(const Eigen::Ref<const Eigen::VectorXf>& x_t,
                                const SpeakerEmbedding& e_target, float s_t);

/// Conditioned input matrix for a whole utterance (arch_input_dim x T).
/// target may be null for SC/ST; scores may be null for ET.
Eigen::MatrixXf build_inputs(ArchitectureKind arch,
                             const Eigen::MatrixXf& features,
                             const SpeakerEmbedding* target,
                             const std::vector<float>* scores);

/// Combines 2-class VAD probabilities (speech, non-speech) with the
/// verification score: tss = s * speech, ntss = (1-s) * speech, ns kept.
/// s_t is clamped to [0, 1] first. Output sums to one.
Eigen::Vector3f sc_combine(const Eigen::Vector2f& vad_probs, float s_t);

/// Per-frame class scores, probability-normalized when the flag is set
/// (always true for the forward paths here).
struct PvadScores {
  Eigen::MatrixXf scores;  // kNumPvadClasses x T
  bool normalized = true;
};

/// Streaming state: the LSTM state of both layers plus the conditioning
/// context. One instance per audio stream; not shareable.
struct StreamState {
  ArchitectureKind arch = ArchitectureKind::kEt;
  NetworkState<float> net;
  SpeakerEmbedding target;  // empty unless ET/SET
  int64_t frame_counter = 0;
};

StreamState make_stream_state(const NetworkParams<float>& net,
                              ArchitectureKind arch,
                              const SpeakerEmbedding* target);

/// Consumes exactly one frame and emits its normalized 3-class scores.
/// s_t is required for SC/ST/SET and ignored for ET.
Eigen::Vector3f stream_step(const NetworkParams<float>& net, StreamState& state,
                            const Eigen::Ref<const Eigen::VectorXf>& x_t,
                            const float* s_t);

/// Whole-utterance forward pass. Implemented as a fold of stream_step, so
/// batch and streaming outputs are bit-identical.
PvadScores pvad_forward(const NetworkParams<float>& net, ArchitectureKind arch,
                        const Eigen::MatrixXf& features,
                        const SpeakerEmbedding* target,
                        const std::vector<float>* scores);

}  // namespace pvad
