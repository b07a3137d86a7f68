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

#include "pvad/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "pvad/errors.hpp"

namespace pvad {

namespace {

void check_scored_frames(const ScoredFrames& frames) {
  if (frames.scores.rows() != kNumPvadClasses) {
    throw ShapeError("scored frames need " + std::to_string(kNumPvadClasses) +
                     " score rows, got " + std::to_string(frames.scores.rows()));
  }
  if (frames.scores.cols() != frames.num_frames()) {
    throw ShapeError("score/label length mismatch: " +
                     std::to_string(frames.scores.cols()) + " vs " +
                     std::to_string(frames.num_frames()));
  }
  if (!frames.scores.allFinite()) {
    throw DataError("scored frames contain non-finite values");
  }
}

}  // namespace

double average_precision(const std::vector<double>& scores,
                         const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw ShapeError("average_precision: " + std::to_string(scores.size()) +
                     " scores vs " + std::to_string(labels.size()) + " labels");
  }
  if (scores.empty()) throw DataError("average_precision: empty input");

  int64_t total_pos = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      throw DataError("average_precision: non-finite score");
    }
    if (labels[i] != 0 && labels[i] != 1) {
      throw DataError("average_precision: labels must be 0 or 1");
    }
    total_pos += labels[i];
  }
  if (total_pos == 0) {
    throw DataError("average_precision: no positive labels, AP undefined");
  }

  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return scores[a] > scores[b];
  });

  double ap = 0.0;
  double prev_recall = 0.0;
  int64_t tp = 0;
  int64_t seen = 0;
  size_t i = 0;
  while (i < order.size()) {
    // Consume the whole tie group before updating precision/recall.
    size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      tp += labels[order[j]];
      ++seen;
      ++j;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    const double precision =
        static_cast<double>(tp) / static_cast<double>(seen);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

double class_ap(const ScoredFrames& frames, PvadClass cls) {
  check_scored_frames(frames);
  const int row = static_cast<int>(cls);
  std::vector<double> scores(frames.labels.size());
  std::vector<int> labels(frames.labels.size());
  for (size_t t = 0; t < frames.labels.size(); ++t) {
    scores[t] = frames.scores(row, static_cast<Eigen::Index>(t));
    labels[t] = frames.labels[t] == cls ? 1 : 0;
  }
  return average_precision(scores, labels);
}

double map_micro(const ScoredFrames& frames) {
  check_scored_frames(frames);
  if (frames.labels.empty()) throw DataError("map_micro: no frames");

  std::array<int64_t, kNumPvadClasses> counts{};
  for (PvadClass c : frames.labels) counts[static_cast<size_t>(c)] += 1;
  for (int c = 0; c < kNumPvadClasses; ++c) {
    if (counts[static_cast<size_t>(c)] == 0) {
      throw DataError(std::string("map_micro: class '") +
                      token_from_pvad_class(static_cast<PvadClass>(c)) +
                      "' absent from labels");
    }
  }

  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(frames.labels.size() * kNumPvadClasses);
  labels.reserve(frames.labels.size() * kNumPvadClasses);
  for (size_t t = 0; t < frames.labels.size(); ++t) {
    for (int c = 0; c < kNumPvadClasses; ++c) {
      scores.push_back(frames.scores(c, static_cast<Eigen::Index>(t)));
      labels.push_back(static_cast<int>(frames.labels[t]) == c ? 1 : 0);
    }
  }
  return average_precision(scores, labels);
}

BinaryScoredFrames remap_standard_vad(const ScoredFrames& frames) {
  check_scored_frames(frames);
  constexpr float kNormTol = 1e-4f;
  BinaryScoredFrames out;
  out.scores.resize(2, frames.scores.cols());
  out.labels.resize(frames.labels.size());
  for (Eigen::Index t = 0; t < frames.scores.cols(); ++t) {
    const float sum = frames.scores.col(t).sum();
    if (std::abs(sum - 1.0f) > kNormTol || frames.scores.col(t).minCoeff() < 0) {
      throw DataError("remap_standard_vad: column " + std::to_string(t) +
                      " is not a probability vector");
    }
    out.scores(kVadSpeech, t) =
        frames.scores(static_cast<int>(PvadClass::kTss), t) +
        frames.scores(static_cast<int>(PvadClass::kNtss), t);
    out.scores(kVadNonSpeech, t) =
        frames.scores(static_cast<int>(PvadClass::kNs), t);
    out.labels[static_cast<size_t>(t)] =
        frames.labels[static_cast<size_t>(t)] == PvadClass::kNs ? kVadNonSpeech
                                                                : kVadSpeech;
  }
  return out;
}

double ap_speech(const BinaryScoredFrames& frames) {
  if (frames.scores.rows() != 2 ||
      frames.scores.cols() != static_cast<Eigen::Index>(frames.labels.size())) {
    throw ShapeError("ap_speech: malformed binary frames");
  }
  std::vector<double> scores(frames.labels.size());
  std::vector<int> labels(frames.labels.size());
  for (size_t t = 0; t < frames.labels.size(); ++t) {
    scores[t] = frames.scores(kVadSpeech, static_cast<Eigen::Index>(t));
    labels[t] = frames.labels[t] == kVadSpeech ? 1 : 0;
  }
  return average_precision(scores, labels);
}

double EvalReport::ap_for(PvadClass cls) const {
  switch (cls) {
    case PvadClass::kTss:
      return ap_tss;
    case PvadClass::kNs:
      return ap_ns;
    case PvadClass::kNtss:
      return ap_ntss;
  }
  throw ConfigError("ap_for: bad class");
}

std::string EvalReport::to_text() const {
  std::ostringstream os;
  if (!config_echo.empty()) os << "config: " << config_echo << '\n';
  int64_t total = 0;
  for (int64_t c : class_counts) total += c;
  char line[96];
  os << " class      AP   frames\n";
  for (int c = 0; c < kNumPvadClasses; ++c) {
    std::snprintf(line, sizeof(line), "%6s  %6.4f  %7lld\n",
                  token_from_pvad_class(static_cast<PvadClass>(c)),
                  ap_for(static_cast<PvadClass>(c)),
                  static_cast<long long>(class_counts[static_cast<size_t>(c)]));
    os << line;
  }
  std::snprintf(line, sizeof(line), "%6s  %6.4f  %7lld\n", "micro", micro_map,
                static_cast<long long>(total));
  os << line;
  return os.str();
}

EvalReport evaluate_frames(const ScoredFrames& frames,
                           std::string config_echo) {
  check_scored_frames(frames);
  EvalReport report;
  report.config_echo = std::move(config_echo);
  report.ap_tss = class_ap(frames, PvadClass::kTss);
  report.ap_ns = class_ap(frames, PvadClass::kNs);
  report.ap_ntss = class_ap(frames, PvadClass::kNtss);
  report.micro_map = map_micro(frames);
  for (PvadClass c : frames.labels) {
    report.class_counts[static_cast<size_t>(c)] += 1;
  }
  return report;
}

void append_frames(ScoredFrames& pool, const Eigen::MatrixXf& scores,
                   const std::vector<PvadClass>& labels) {
  if (scores.rows() != kNumPvadClasses ||
      scores.cols() != static_cast<Eigen::Index>(labels.size())) {
    throw ShapeError("append_frames: scores/labels shape mismatch");
  }
  const Eigen::Index old_cols = pool.scores.cols();
  if (old_cols == 0) {
    pool.scores = scores;
  } else {
    Eigen::MatrixXf merged(kNumPvadClasses, old_cols + scores.cols());
    merged.leftCols(old_cols) = pool.scores;
    merged.rightCols(scores.cols()) = scores;
    pool.scores = std::move(merged);
  }
  pool.labels.insert(pool.labels.end(), labels.begin(), labels.end());
}

}  // namespace pvad
