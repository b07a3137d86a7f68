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

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "pvad/audio.hpp"

namespace pvad {

/// Log mel-filterbank front end. Frames are 25 ms with a 10 ms hop at
/// 16 kHz; each frame is Hann-windowed, transformed to a power spectrum,
/// pooled through triangular mel filters and log-compressed.
struct FeatureConfig {
  int sample_rate = kDefaultSampleRate;
  double frame_width_ms = 25.0;
  double frame_step_ms = 10.0;
  int num_mel_bins = 40;
  /// 0 selects the smallest power of two >= frame width in samples.
  int fft_size = 0;
  double mel_low_hz = 125.0;
  double mel_high_hz = 7500.0;
  double log_floor = 1e-10;

  int frame_width_samples() const;
  int frame_step_samples() const;
  int effective_fft_size() const;
  void validate() const;
};

/// Number of whole frames in a signal of n samples. No padding: a tail
/// shorter than one frame width is dropped.
int num_frames(int64_t n_samples, const FeatureConfig& cfg);

/// Splits a signal into overlapping frames (row-major: frames x width).
/// Throws DataError if the signal is shorter than one frame.
Eigen::MatrixXf frame_signal(std::span<const float> samples,
                             const FeatureConfig& cfg);

double hz_to_mel(double hz);
double mel_from_hz(double mel);

/// Triangular mel filterbank, rows = mel bins, cols = fft_size/2 + 1.
/// Throws ConfigError if any filter row sums to zero.
Eigen::MatrixXd build_mel_filterbank(const FeatureConfig& cfg);

class FeatureExtractor {
 public:
  explicit FeatureExtractor(FeatureConfig cfg = {});

  const FeatureConfig& config() const { return cfg_; }
  int feature_dim() const { return cfg_.num_mel_bins; }

  /// Features for a whole utterance, shape num_mel_bins x num_frames.
  Eigen::MatrixXf extract(std::span<const float> samples) const;
  Eigen::MatrixXf extract(const AudioBuffer& audio) const;

  /// Features for a single frame of exactly frame_width_samples() samples.
  Eigen::VectorXf extract_frame(std::span<const float> frame) const;

 private:
  FeatureConfig cfg_;
  Eigen::VectorXd window_;       // periodic Hann, length = frame width
  Eigen::MatrixXd filterbank_;   // num_mel_bins x (fft_size/2 + 1)
};

}  // namespace pvad
