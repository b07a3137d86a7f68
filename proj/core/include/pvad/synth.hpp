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
#include <vector>

#include "pvad/audio.hpp"
#include "pvad/embedding.hpp"
#include "pvad/features.hpp"
#include "pvad/model.hpp"

namespace pvad {

/// Single-speaker utterance: alternating synthetic speech segments and
/// silence gaps, with per-frame speech/non-speech labels known by
/// construction. Segment boundaries sit on the frame-step grid and the
/// audio starts and ends with a silence gap, which keeps labels exact
/// through concatenation.
struct SourceUtterance {
  AudioBuffer audio;
  std::vector<uint8_t> frame_is_speech;  // 1 = s, 0 = ns
  std::string speaker_id;
  std::string utterance_id;
};

/// Deterministic in (speaker, duration, seed). duration_s >= 0.5; at
/// least one speech segment is always placed.
SourceUtterance synth_source_utterance(const SyntheticSpeaker& speaker,
                                       double duration_s, uint64_t seed,
                                       const FeatureConfig& fcfg = {});

/// Integer uniform on {a, ..., b} inclusive.
int sample_n(int a, int b, Rng& rng);

/// Concatenation of one or more source utterances with relabeling:
/// ns stays ns; s becomes tss for the target speaker and ntss otherwise.
struct ConcatUtterance {
  AudioBuffer audio;
  std::vector<PvadClass> frame_labels;
  std::string target_speaker_id;
  std::vector<std::string> speaker_ids;   // per source, in order
  std::vector<int> frame_speaker;         // per frame: index into speaker_ids
  std::vector<std::string> source_ids;    // provenance
  std::vector<int64_t> boundaries;        // concat sample offset per source

  int num_frames() const { return static_cast<int>(frame_labels.size()); }
  /// Attribution for the oracle embedder: speaker index on speech frames,
  /// -1 on non-speech frames.
  std::vector<int> scores_attribution() const;
};

/// Frame-aligned concatenation: each source is trimmed to a whole frame
/// grid and every source after the first drops its (silent) leading
/// width-step samples, so the concatenated frame count equals the sum of
/// the per-source frame counts and every frame keeps its source's label.
ConcatUtterance concat_utterances(const std::vector<SourceUtterance>& utts,
                                  const std::string& target_id,
                                  const FeatureConfig& fcfg = {});

enum class NoiseKind { kWhite, kPink, kBabble };
NoiseKind noise_kind_from_string(const std::string& name);
const char* noise_kind_name(NoiseKind kind);

AudioBuffer gen_noise(NoiseKind kind, int64_t num_samples, int sample_rate,
                      Rng& rng);

/// Augmentation recipe for one utterance. No snr_db means no noise;
/// reverb_decay_ms == 0 means no reverb.
struct AugmentSpec {
  std::optional<double> snr_db;
  NoiseKind noise_kind = NoiseKind::kWhite;
  double reverb_decay_ms = 0.0;
  uint64_t seed = 0;

  bool is_identity() const { return !snr_db.has_value() && reverb_decay_ms == 0.0; }
};

/// Mean per-frame power over speech-labeled frames (the SNR reference).
double speech_frame_power(const AudioBuffer& audio,
                          const std::vector<PvadClass>& labels,
                          const FeatureConfig& fcfg = {});

/// Adds noise scaled so 10*log10(P_speech / P_noise) == snr_db, with
/// P_speech taken over speech-labeled frames of the input and P_noise over
/// all samples of the (looped/cropped) noise. +inf snr leaves the audio
/// unchanged. If the mix would clip, the whole mix is scaled down
/// uniformly, which preserves the SNR. Labels are untouched.
ConcatUtterance mix_noise(const ConcatUtterance& u, const AudioBuffer& noise,
                          double snr_db);

/// mix_noise plus the two mixed components (both already carrying any
/// headroom attenuation), so callers can re-measure the realized SNR from
/// the waveforms. mixed.audio == signal_component + noise_component.
struct MixDetail {
  ConcatUtterance mixed;
  std::vector<float> signal_component;
  std::vector<float> noise_component;
};
MixDetail mix_noise_detailed(const ConcatUtterance& u, const AudioBuffer& noise,
                             double snr_db);

/// Convolves with a synthetic room impulse response: unit direct path plus
/// an exponentially decaying gaussian tail reaching -60 dB at decay_ms.
/// Output is truncated to the input length and renormalized to the input
/// peak. Labels are untouched.
ConcatUtterance apply_reverb(const ConcatUtterance& u, double decay_ms,
                             uint64_t seed);

/// Full augmentation chain: reverb first, then noise, so the stated SNR
/// holds on the final audio exactly.
ConcatUtterance apply_augment(const ConcatUtterance& clean,
                              const AugmentSpec& spec);

}  // namespace pvad
