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
#include <vector>

namespace pvad {

inline constexpr int kDefaultSampleRate = 16000;

/// Mono PCM audio held as floats in [-1, 1].
struct AudioBuffer {
  std::vector<float> samples;
  int sample_rate = kDefaultSampleRate;

  int num_samples() const { return static_cast<int>(samples.size()); }
  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                           : 0.0;
  }
};

/// Throws ConfigError/DataError if the buffer violates its invariants
/// (positive sample rate, all samples finite).
void validate_audio(const AudioBuffer& audio);

/// Reads a mono 16-bit PCM WAV file. Files with any other sample rate,
/// channel count, bit depth or codec are rejected with a DataError naming
/// the offending property.
AudioBuffer read_wav(const std::filesystem::path& path,
                     int required_sample_rate = kDefaultSampleRate);

/// Writes mono 16-bit PCM. Samples are clamped to [-1, 1] before
/// conversion; quantization is round-to-nearest.
void write_wav(const std::filesystem::path& path, const AudioBuffer& audio);

/// The exact int16 value write_wav stores for one float sample.
std::int16_t pcm16_from_float(float sample);

}  // namespace pvad
