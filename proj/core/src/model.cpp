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

#include "pvad/model.hpp"

#include <algorithm>

namespace pvad {

PvadClass pvad_class_from_token(const std::string& token) {
  if (token == "tss") return PvadClass::kTss;
  if (token == "ns") return PvadClass::kNs;
  if (token == "ntss") return PvadClass::kNtss;
  throw DataError("unknown class token '" + token + "' (want ns|tss|ntss)");
}

const char* token_from_pvad_class(PvadClass c) {
  switch (c) {
    case PvadClass::kTss: return "tss";
    case PvadClass::kNs: return "ns";
    case PvadClass::kNtss: return "ntss";
  }
  throw DataError("invalid PvadClass value");
}

ArchitectureKind arch_from_string(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "sc") return ArchitectureKind::kSc;
  if (lower == "st") return ArchitectureKind::kSt;
  if (lower == "et") return ArchitectureKind::kEt;
  if (lower == "set") return ArchitectureKind::kSet;
  throw UsageError("unknown architecture '" + name + "' (want sc|st|et|set)");
}

const char* arch_name(ArchitectureKind arch) {
  switch (arch) {
    case ArchitectureKind::kSc: return "sc";
    case ArchitectureKind::kSt: return "st";
    case ArchitectureKind::kEt: return "et";
    case ArchitectureKind::kSet: return "set";
  }
  throw UsageError("invalid ArchitectureKind value");
}

int arch_input_dim(ArchitectureKind arch, int feature_dim) {
  switch (arch) {
    case ArchitectureKind::kSc: return feature_dim;
    case ArchitectureKind::kSt: return feature_dim + 1;
    case ArchitectureKind::kEt: return feature_dim + kEmbeddingDim;
    case ArchitectureKind::kSet: return feature_dim + kEmbeddingDim + 1;
  }
  throw UsageError("invalid ArchitectureKind value");
}

int arch_num_classes(ArchitectureKind arch) {
  return arch == ArchitectureKind::kSc ? 2 : kNumPvadClasses;
}

Eigen::VectorXf build_input_st(const Eigen::Ref<const Eigen::VectorXf>& x_t,
                               float s_t) {
  if (!std::isfinite(s_t)) throw DataError("build_input_st: non-finite score");
  Eigen::VectorXf out(x_t.size() + 1);
  out.head(x_t.size()) = x_t;
  out(x_t.size()) = s_t;
  return out;
}

Eigen::VectorXf build_input_et(const Eigen::Ref<const Eigen::VectorXf>& x_t,
                               const SpeakerEmbedding& e_target) {
  if (e_target.size() != kEmbeddingDim) {
    throw ShapeError("build_input_et: embedding must be " +
                     std::to_string(kEmbeddingDim) + "-dim, got " +
                     std::to_string(e_target.size()));
  }
  Eigen::VectorXf out(x_t.size() + kEmbeddingDim);
  out.head(x_t.size()) = x_t;
  out.tail(kEmbeddingDim) = e_target;
  return out;
}

Eigen::VectorXf build_input_set(const Eigen::Ref<const Eigen::VectorXf>& x_t,
                                const SpeakerEmbedding& e_target, float s_t) {
  if (!std::isfinite(s_t)) throw DataError("build_input_set: non-finite score");
  Eigen::VectorXf et = build_input_et(x_t, e_target);
  Eigen::VectorXf out(et.size() + 1);
  out.head(et.size()) = et;
  out(et.size()) = s_t;
  return out;
}

namespace {

void check_conditioning(ArchitectureKind arch, const SpeakerEmbedding* target,
                        const std::vector<float>* scores, Eigen::Index frames) {
  const bool needs_scores = arch != ArchitectureKind::kEt;
  const bool needs_target =
      arch == ArchitectureKind::kEt || arch == ArchitectureKind::kSet;
  if (needs_scores && scores == nullptr) {
    throw UsageError(std::string(arch_name(arch)) +
                     " requires per-frame verification scores");
  }
  if (needs_target && target == nullptr) {
    throw UsageError(std::string(arch_name(arch)) +
                     " requires a target enrollment embedding");
  }
  if (needs_scores &&
      static_cast<Eigen::Index>(scores->size()) != frames) {
    throw ShapeError("scores length " + std::to_string(scores->size()) +
                     " != frame count " + std::to_string(frames));
  }
}

}  // namespace

Eigen::MatrixXf build_inputs(ArchitectureKind arch,
                             const Eigen::MatrixXf& features,
                             const SpeakerEmbedding* target,
                             const std::vector<float>* scores) {
  check_conditioning(arch, target, scores, features.cols());
  const Eigen::Index T = features.cols();
  const int dim = arch_input_dim(arch, static_cast<int>(features.rows()));
  Eigen::MatrixXf inputs(dim, T);
  for (Eigen::Index t = 0; t < T; ++t) {
    switch (arch) {
      case ArchitectureKind::kSc:
        inputs.col(t) = features.col(t);
        break;
      case ArchitectureKind::kSt:
        inputs.col(t) = build_input_st(features.col(t),
                                       (*scores)[static_cast<size_t>(t)]);
        break;
      case ArchitectureKind::kEt:
        inputs.col(t) = build_input_et(features.col(t), *target);
        break;
      case ArchitectureKind::kSet:
        inputs.col(t) = build_input_set(features.col(t), *target,
                                        (*scores)[static_cast<size_t>(t)]);
        break;
    }
  }
  return inputs;
}

Eigen::Vector3f sc_combine(const Eigen::Vector2f& vad_probs, float s_t) {
  const float s = std::clamp(s_t, 0.0f, 1.0f);
  Eigen::Vector3f out;
  out(static_cast<int>(PvadClass::kTss)) = s * vad_probs(kVadSpeech);
  out(static_cast<int>(PvadClass::kNs)) = vad_probs(kVadNonSpeech);
  out(static_cast<int>(PvadClass::kNtss)) = (1.0f - s) * vad_probs(kVadSpeech);
  return out;
}

StreamState make_stream_state(const NetworkParams<float>& net,
                              ArchitectureKind arch,
                              const SpeakerEmbedding* target) {
  if (net.num_classes() != arch_num_classes(arch)) {
    throw ShapeError(std::string("network has ") +
                     std::to_string(net.num_classes()) + " classes but " +
                     arch_name(arch) + " needs " +
                     std::to_string(arch_num_classes(arch)));
  }
  StreamState state;
  state.arch = arch;
  state.net.reset(net.hidden_dim());
  const bool needs_target =
      arch == ArchitectureKind::kEt || arch == ArchitectureKind::kSet;
  if (needs_target) {
    if (target == nullptr) {
      throw UsageError(std::string(arch_name(arch)) +
                       " requires a target enrollment embedding");
    }
    state.target = *target;
  }
  return state;
}

Eigen::Vector3f stream_step(const NetworkParams<float>& net, StreamState& state,
                            const Eigen::Ref<const Eigen::VectorXf>& x_t,
                            const float* s_t) {
  const bool needs_score = state.arch != ArchitectureKind::kEt;
  if (needs_score && s_t == nullptr) {
    throw UsageError(std::string(arch_name(state.arch)) +
                     " stream_step requires a per-frame score");
  }

  Eigen::VectorXf input;
  switch (state.arch) {
    case ArchitectureKind::kSc:
      input = x_t;
      break;
    case ArchitectureKind::kSt:
      input = build_input_st(x_t, *s_t);
      break;
    case ArchitectureKind::kEt:
      input = build_input_et(x_t, state.target);
      break;
    case ArchitectureKind::kSet:
      input = build_input_set(x_t, state.target, *s_t);
      break;
  }
  if (input.size() != net.input_dim()) {
    throw ShapeError("stream_step: built input dim " +
                     std::to_string(input.size()) + " != network input dim " +
                     std::to_string(net.input_dim()));
  }

  const Eigen::VectorXf logits = network_step<float>(net, state.net, input);
  state.frame_counter += 1;

  if (state.arch == ArchitectureKind::kSc) {
    const Eigen::VectorXf probs =
        softmax<float>(Eigen::Ref<const Eigen::VectorXf>(logits));
    return sc_combine(Eigen::Vector2f(probs(0), probs(1)), *s_t);
  }
  const Eigen::VectorXf probs =
      softmax<float>(Eigen::Ref<const Eigen::VectorXf>(logits));
  return Eigen::Vector3f(probs(0), probs(1), probs(2));
}

PvadScores pvad_forward(const NetworkParams<float>& net, ArchitectureKind arch,
                        const Eigen::MatrixXf& features,
                        const SpeakerEmbedding* target,
                        const std::vector<float>* scores) {
  check_conditioning(arch, target, scores, features.cols());
  StreamState state = make_stream_state(net, arch, target);
  PvadScores out;
  out.scores.resize(kNumPvadClasses, features.cols());
  out.normalized = true;
  for (Eigen::Index t = 0; t < features.cols(); ++t) {
    const float* s =
        scores ? &(*scores)[static_cast<size_t>(t)] : nullptr;
    out.scores.col(t) = stream_step(net, state, features.col(t), s);
  }
  return out;
}

}  // namespace pvad
