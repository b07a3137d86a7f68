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

#include "pvad/features.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pvad/errors.hpp"
#include "pvad/fft.hpp"

namespace pvad {

int FeatureConfig::frame_width_samples() const {
  return static_cast<int>(std::lround(frame_width_ms * sample_rate / 1000.0));
}

int FeatureConfig::frame_step_samples() const {
  return static_cast<int>(std::lround(frame_step_ms * sample_rate / 1000.0));
}

int FeatureConfig::effective_fft_size() const {
  if (fft_size > 0) return fft_size;
  return next_power_of_two(frame_width_samples());
}

void FeatureConfig::validate() const {
  if (sample_rate <= 0) throw ConfigError("features: sample_rate must be > 0");
  if (frame_width_ms <= 0 || frame_step_ms <= 0) {
    throw ConfigError("features: frame width and step must be > 0");
  }
  if (frame_step_samples() > frame_width_samples()) {
    throw ConfigError("features: frame step must not exceed frame width");
  }
  if (num_mel_bins <= 0) throw ConfigError("features: num_mel_bins must be > 0");
  const int nfft = effective_fft_size();
  if (!is_power_of_two(nfft)) {
    throw ConfigError("features: fft_size must be a power of two");
  }
  if (nfft < frame_width_samples()) {
    throw ConfigError("features: fft_size smaller than the frame width");
  }
  if (mel_low_hz < 0 || mel_high_hz <= mel_low_hz) {
    throw ConfigError("features: need 0 <= mel_low_hz < mel_high_hz");
  }
  if (mel_high_hz > sample_rate / 2.0) {
    throw ConfigError("features: mel_high_hz above Nyquist");
  }
  if (log_floor <= 0) throw ConfigError("features: log_floor must be > 0");
}

int num_frames(int64_t n_samples, const FeatureConfig& cfg) {
  const int64_t width = cfg.frame_width_samples();
  const int64_t step = cfg.frame_step_samples();
  if (n_samples < width) return 0;
  return static_cast<int>((n_samples - width) / step + 1);
}

Eigen::MatrixXf frame_signal(std::span<const float> samples,
                             const FeatureConfig& cfg) {
  cfg.validate();
  const int width = cfg.frame_width_samples();
  const int step = cfg.frame_step_samples();
  const int frames = num_frames(static_cast<int64_t>(samples.size()), cfg);
  if (frames == 0) {
    throw DataError("frame_signal: signal shorter than one frame (" +
                    std::to_string(samples.size()) + " < " +
                    std::to_string(width) + " samples)");
  }
  Eigen::MatrixXf out(frames, width);
  for (int t = 0; t < frames; ++t) {
    const size_t off = static_cast<size_t>(t) * static_cast<size_t>(step);
    for (int i = 0; i < width; ++i) {
      out(t, i) = samples[off + static_cast<size_t>(i)];
    }
  }
  return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_from_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

Eigen::MatrixXd build_mel_filterbank(const FeatureConfig& cfg) {
  cfg.validate();
  const int nfft = cfg.effective_fft_size();
  const int bins = nfft / 2 + 1;
  const double mel_lo = hz_to_mel(cfg.mel_low_hz);
  const double mel_hi = hz_to_mel(cfg.mel_high_hz);

  // Band edges: num_mel_bins + 2 points evenly spaced on the mel scale.
  std::vector<double> edges_hz(static_cast<size_t>(cfg.num_mel_bins) + 2);
  for (size_t i = 0; i < edges_hz.size(); ++i) {
    const double mel = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                    static_cast<double>(cfg.num_mel_bins + 1);
    edges_hz[i] = mel_from_hz(mel);
  }

  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(cfg.num_mel_bins, bins);
  const double hz_per_bin = static_cast<double>(cfg.sample_rate) / nfft;
  for (int m = 0; m < cfg.num_mel_bins; ++m) {
    const double lo = edges_hz[static_cast<size_t>(m)];
    const double mid = edges_hz[static_cast<size_t>(m) + 1];
    const double hi = edges_hz[static_cast<size_t>(m) + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = k * hz_per_bin;
      double w = 0.0;
      if (f > lo && f < mid) {
        w = (f - lo) / (mid - lo);
      } else if (f >= mid && f < hi) {
        w = (hi - f) / (hi - mid);
      }
      fb(m, k) = w;
    }
    if (fb.row(m).sum() <= 0.0) {
      throw ConfigError(
          "features: mel filter " + std::to_string(m) +
          " covers no FFT bins; reduce num_mel_bins or widen the band");
    }
  }
  return fb;
}

FeatureExtractor::FeatureExtractor(FeatureConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  const int width = cfg_.frame_width_samples();
  window_.resize(width);
  for (int i = 0; i < width; ++i) {
    // Periodic Hann (denominator N, not N-1).
    window_(i) =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / static_cast<double>(width));
  }
  filterbank_ = build_mel_filterbank(cfg_);
}

Eigen::VectorXf FeatureExtractor::extract_frame(
    std::span<const float> frame) const {
  const int width = cfg_.frame_width_samples();
  if (static_cast<int>(frame.size()) != width) {
    throw ShapeError("extract_frame: expected " + std::to_string(width) +
                     " samples, got " + std::to_string(frame.size()));
  }
  std::vector<double> windowed(static_cast<size_t>(width));
  for (int i = 0; i < width; ++i) {
    windowed[static_cast<size_t>(i)] = frame[static_cast<size_t>(i)] * window_(i);
  }
  const std::vector<double> power =
      power_spectrum(windowed, cfg_.effective_fft_size());
  Eigen::Map<const Eigen::VectorXd> pvec(power.data(),
                                         static_cast<Eigen::Index>(power.size()));
  Eigen::VectorXd mel = filterbank_ * pvec;
  Eigen::VectorXf out(cfg_.num_mel_bins);
  for (int m = 0; m < cfg_.num_mel_bins; ++m) {
    out(m) = static_cast<float>(std::log(std::max(mel(m), cfg_.log_floor)));
  }
  return out;
}

Eigen::MatrixXf FeatureExtractor::extract(std::span<const float> samples) const {
  const int width = cfg_.frame_width_samples();
  const int step = cfg_.frame_step_samples();
  const int frames = num_frames(static_cast<int64_t>(samples.size()), cfg_);
  if (frames == 0) {
    throw DataError("extract: signal shorter than one frame (" +
                    std::to_string(samples.size()) + " < " +
                    std::to_string(width) + " samples)");
  }
  Eigen::MatrixXf out(cfg_.num_mel_bins, frames);
  for (int t = 0; t < frames; ++t) {
    const size_t off = static_cast<size_t>(t) * static_cast<size_t>(step);
    out.col(t) = extract_frame(samples.subspan(off, static_cast<size_t>(width)));
  }
  return out;
}

Eigen::MatrixXf FeatureExtractor::extract(const AudioBuffer& audio) const {
  if (audio.sample_rate != cfg_.sample_rate) {
    throw DataError("extract: audio sample rate " +
                    std::to_string(audio.sample_rate) + " != configured " +
                    std::to_string(cfg_.sample_rate));
  }
  return extract(std::span<const float>(audio.samples));
}

}  // namespace pvad
