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

#include <string>
#include <vector>

#include "pvad/corpus.hpp"
#include "pvad/eval.hpp"
#include "pvad/features.hpp"
#include "pvad/model.hpp"

namespace pvad {

/// One corpus record made ready for training or evaluation: log mel
/// features from the on-disk audio, ground-truth labels, oracle
/// verification scores, and the target speaker's enrollment embedding.
struct PreparedUtterance {
  std::string id;
  std::string split;
  Eigen::MatrixXf features;       // feature_dim x T
  std::vector<PvadClass> labels;  // T
  std::vector<float> scores;      // T, cosine scores in [-1, 1]
  SpeakerEmbedding target;        // enrollment profile of the target
  int num_sources = 0;
};

struct DatasetOptions {
  EmbedderConfig embedder;
  FeatureConfig features;
  int max_utterances = 0;  // 0 = all records of the split
};

/// Loads every record of a split. Frame scores are regenerated
/// deterministically from each record's seed, so repeated loads agree.
std::vector<PreparedUtterance> prepare_split(const CorpusManifest& manifest,
                                             const std::string& split,
                                             const DatasetOptions& opts = {});

/// Runs the model over each utterance and pools the per-frame scores.
/// For SC `net` is the 2-class VAD net and the oracle scores are combined in.
ScoredFrames score_utterances(const NetworkParams<float>& net,
                              ArchitectureKind arch,
                              const std::vector<PreparedUtterance>& utts);

/// 2-class standard VAD scoring: softmax of the VAD net, labels collapsed
/// to speech/non-speech.
BinaryScoredFrames score_utterances_vad(const NetworkParams<float>& net,
                                        const std::vector<PreparedUtterance>& utts);

/// tss/ntss -> speech, ns -> non-speech.
std::vector<int> collapse_to_vad_labels(const std::vector<PvadClass>& labels);

}  // namespace pvad
