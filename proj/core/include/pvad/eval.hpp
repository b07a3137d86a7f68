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

#ifndef PVAD_EVAL_HPP_
#define PVAD_EVAL_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pvad/model.hpp"

namespace pvad {

// Frame-level scores for the 3-class task. `scores` is (num classes x T),
// each column a probability vector; `labels` holds the ground truth per frame.
struct ScoredFrames {
  Eigen::MatrixXf scores;
  std::vector<PvadClass> labels;

  int64_t num_frames() const { return static_cast<int64_t>(labels.size()); }
};

// Two-class view used for standard VAD comparisons. Row 0 is speech,
// row 1 non-speech; labels use kVadSpeech / kVadNonSpeech.
struct BinaryScoredFrames {
  Eigen::MatrixXf scores;
  std::vector<int> labels;
};

// Average precision with grouped ties: frames sharing a score enter at a
// single threshold. Requires at least one positive label.
double average_precision(const std::vector<double>& scores,
                         const std::vector<int>& labels);

// One-vs-rest AP for a single class of the 3-class problem.
double class_ap(const ScoredFrames& frames, PvadClass cls);

// Micro mAP: every (frame, class) pair becomes one binary decision and a
// single AP is computed over the pooled list. All three classes must occur.
double map_micro(const ScoredFrames& frames);

// Collapse 3-class scores to speech/non-speech: speech = tss + ntss.
// Input columns must be probability-normalized.
BinaryScoredFrames remap_standard_vad(const ScoredFrames& frames);

// AP of the speech class of a binary problem.
double ap_speech(const BinaryScoredFrames& frames);

struct EvalReport {
  double ap_tss = 0.0;
  double ap_ns = 0.0;
  double ap_ntss = 0.0;
  double micro_map = 0.0;
  std::array<int64_t, kNumPvadClasses> class_counts{};
  std::string config_echo;

  double ap_for(PvadClass cls) const;
  // Aligned plain-text table: one row per class plus the micro mean.
  std::string to_text() const;
};

EvalReport evaluate_frames(const ScoredFrames& frames,
                           std::string config_echo = {});

// Appends one utterance's normalized scores and labels to a pooled set.
void append_frames(ScoredFrames& pool, const Eigen::MatrixXf& scores,
                   const std::vector<PvadClass>& labels);

}  // namespace pvad

#endif  // PVAD_EVAL_HPP_
