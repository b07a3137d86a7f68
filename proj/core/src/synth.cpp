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

#include "pvad/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pvad/fft.hpp"

namespace pvad {

namespace {

constexpr int kWavetableSize = 4096;
constexpr int kMaxHarmonics = 128;
constexpr double kMaxHarmonicHz = 7000.0;
constexpr double kBaseSpeechRms = 0.08;
constexpr double kDitherSigma = 7e-4;
constexpr int kFadeSamples = 160;  // 10 ms

double db_to_amp(double db) { return std::pow(10.0, db / 20.0); }

/// Per-speaker fixed harmonic colouration beyond the trait-derived
/// envelope; this is what timbre_seed contributes.
std::vector<double> speaker_harmonic_comb(uint64_t timbre_seed) {
  Rng rng(hash_combine(timbre_seed, hash_str("harmonic-comb")));
  std::vector<double> comb(kMaxHarmonics);
  for (auto& c : comb) c = rng.uniform(-2.0, 2.0);
  return comb;
}

double formant_peak_db(double f, double center, double rel_bandwidth,
                       double gain_db) {
  const double bw = rel_bandwidth * center;
  const double d = (f - center) / bw;
  return gain_db * std::exp(-0.5 * d * d);
}

/// One static-envelope wavetable: harmonics of the speaker's spectral
/// envelope with per-segment random phases and amplitude jitter.
/// Returned table has unit RMS.
std::vector<float> build_wavetable(const VoiceTraits& traits,
                                   const std::vector<double>& comb, double f0,
                                   double per_harmonic_jitter_db, Rng& rng) {
  const int num_harmonics = std::max(
      1, std::min(kMaxHarmonics, static_cast<int>(kMaxHarmonicHz / f0)));
  std::vector<double> amp(static_cast<size_t>(num_harmonics));
  std::vector<double> phase(static_cast<size_t>(num_harmonics));
  for (int k = 1; k <= num_harmonics; ++k) {
    const double f = k * f0;
    double db = traits.tilt_db_per_octave * std::log2(f / f0);
    db += formant_peak_db(f, traits.formant1_hz, 0.18, traits.formant_gain_db);
    db += formant_peak_db(f, traits.formant2_hz, 0.14,
                          0.75 * traits.formant_gain_db);
    db += comb[static_cast<size_t>(k - 1)];
    db += rng.uniform(-per_harmonic_jitter_db, per_harmonic_jitter_db);
    amp[static_cast<size_t>(k - 1)] = db_to_amp(db);
    phase[static_cast<size_t>(k - 1)] = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }

  std::vector<float> table(kWavetableSize);
  double sumsq = 0.0;
  for (int i = 0; i < kWavetableSize; ++i) {
    double v = 0.0;
    const double x = 2.0 * std::numbers::pi * i / kWavetableSize;
    for (int k = 1; k <= num_harmonics; ++k) {
      v += amp[static_cast<size_t>(k - 1)] *
           std::sin(k * x + phase[static_cast<size_t>(k - 1)]);
    }
    table[static_cast<size_t>(i)] = static_cast<float>(v);
    sumsq += v * v;
  }
  const double rms = std::sqrt(sumsq / kWavetableSize);
  const float inv = rms > 0.0 ? static_cast<float>(1.0 / rms) : 1.0f;
  for (auto& v : table) v *= inv;
  return table;
}

float table_lookup(const std::vector<float>& table, double phase_cycles) {
  const double pos = (phase_cycles - std::floor(phase_cycles)) * kWavetableSize;
  const int i0 = static_cast<int>(pos);
  const int i1 = (i0 + 1) & (kWavetableSize - 1);
  const float frac = static_cast<float>(pos - i0);
  return table[static_cast<size_t>(i0)] +
         frac * (table[static_cast<size_t>(i1)] - table[static_cast<size_t>(i0)]);
}

struct Segment {
  int64_t begin = 0;
  int64_t length = 0;
};

/// Renders one voiced segment in place: wavetable oscillator with slow
/// vibrato, aspiration noise, and raised-cosine edge fades.
void render_speech_segment(std::vector<float>& out, const Segment& seg,
                           const VoiceTraits& traits,
                           const std::vector<double>& comb, int sample_rate,
                           Rng& rng) {
  const double f0 = traits.f0_hz * std::exp2(rng.uniform(-0.2, 0.2));
  const double seg_rms = kBaseSpeechRms * db_to_amp(rng.uniform(-3.0, 3.0));
  const double vib_rate = 5.0 * (1.0 + 0.2 * (rng.uniform() - 0.5));
  const double vib_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const std::vector<float> table = build_wavetable(traits, comb, f0, 2.0, rng);

  const int64_t fade = std::min<int64_t>(kFadeSamples, seg.length / 2);
  double phase = 0.0;
  for (int64_t i = 0; i < seg.length; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double f = f0 * std::exp2(0.035 * std::sin(2.0 * std::numbers::pi *
                                                         vib_rate * t +
                                                     vib_phase));
    phase += f / sample_rate;
    double v = table_lookup(table, phase) * seg_rms;
    v += traits.breathiness * seg_rms * rng.gaussian();
    double env = 1.0;
    if (i < fade) {
      env = 0.5 * (1.0 - std::cos(std::numbers::pi * (i + 0.5) / fade));
    } else if (i >= seg.length - fade) {
      const int64_t j = seg.length - 1 - i;
      env = 0.5 * (1.0 - std::cos(std::numbers::pi * (j + 0.5) / fade));
    }
    out[static_cast<size_t>(seg.begin + i)] += static_cast<float>(v * env);
  }
}

}  // namespace

int sample_n(int a, int b, Rng& rng) {
  if (a < 1 || a > b) {
    throw ConfigError("sample_n: need 1 <= a <= b, got a=" + std::to_string(a) +
                      " b=" + std::to_string(b));
  }
  return static_cast<int>(rng.uniform_int(a, b));
}

SourceUtterance synth_source_utterance(const SyntheticSpeaker& speaker,
                                       double duration_s, uint64_t seed,
                                       const FeatureConfig& fcfg) {
  if (!(duration_s >= 0.5) || !std::isfinite(duration_s)) {
    throw ConfigError("synth_source_utterance: duration must be >= 0.5 s");
  }
  fcfg.validate();
  const int sr = fcfg.sample_rate;
  const int step = fcfg.frame_step_samples();
  const int64_t n = std::llround(duration_s * sr);

  Rng rng(hash_combine(seed, hash_str(speaker.speaker_id)));
  const VoiceTraits traits = VoiceTraits::from_voice_point(speaker.voice_point);
  const std::vector<double> comb = speaker_harmonic_comb(speaker.timbre_seed);

  // Plan speech segments on the frame-step grid, with silence at both
  // ends so concatenation boundaries always fall on silence.
  auto quantize = [step](double seconds, int sr_) {
    const int64_t samples = std::llround(seconds * sr_);
    return std::max<int64_t>(step, (samples / step) * step);
  };
  const int64_t min_tail = quantize(0.1, sr);
  std::vector<Segment> segments;
  int64_t pos = quantize(rng.uniform(0.12, 0.4), sr);
  while (true) {
    const int64_t speech = quantize(rng.uniform(0.5, 1.5), sr);
    const int64_t gap = quantize(rng.uniform(0.1, 0.4), sr);
    if (pos + speech + gap > n) break;
    segments.push_back({pos, speech});
    pos += speech + gap;
  }
  if (segments.empty()) {
    // Short utterance: one speech segment between minimal gaps.
    const int64_t begin = quantize(0.1, sr);
    const int64_t end = ((n - min_tail) / step) * step;
    if (end - begin < 2 * step) {
      throw ConfigError("synth_source_utterance: duration too short");
    }
    segments.push_back({begin, end - begin});
  }

  std::vector<float> samples(static_cast<size_t>(n), 0.0f);
  for (const Segment& seg : segments) {
    render_speech_segment(samples, seg, traits, comb, sr, rng);
  }
  for (auto& s : samples) {
    s += static_cast<float>(kDitherSigma * rng.gaussian());
    s = std::clamp(s, -1.0f, 1.0f);
  }

  // Per-frame labels by majority sample membership.
  const int width = fcfg.frame_width_samples();
  const int frames = num_frames(n, fcfg);
  std::vector<int64_t> speech_prefix(static_cast<size_t>(n) + 1, 0);
  {
    std::vector<uint8_t> is_speech(static_cast<size_t>(n), 0);
    for (const Segment& seg : segments) {
      std::fill(is_speech.begin() + seg.begin,
                is_speech.begin() + seg.begin + seg.length, uint8_t{1});
    }
    for (int64_t i = 0; i < n; ++i) {
      speech_prefix[static_cast<size_t>(i) + 1] =
          speech_prefix[static_cast<size_t>(i)] + is_speech[static_cast<size_t>(i)];
    }
  }

  SourceUtterance out;
  out.audio.samples = std::move(samples);
  out.audio.sample_rate = sr;
  out.speaker_id = speaker.speaker_id;
  out.utterance_id = speaker.speaker_id + "/" + std::to_string(seed);
  out.frame_is_speech.resize(static_cast<size_t>(frames));
  for (int t = 0; t < frames; ++t) {
    const int64_t lo = static_cast<int64_t>(t) * step;
    const int64_t speech_count = speech_prefix[static_cast<size_t>(lo + width)] -
                                 speech_prefix[static_cast<size_t>(lo)];
    out.frame_is_speech[static_cast<size_t>(t)] =
        speech_count * 2 >= width ? 1 : 0;
  }
  return out;
}

std::vector<int> ConcatUtterance::scores_attribution() const {
  std::vector<int> att(frame_labels.size());
  for (size_t t = 0; t < frame_labels.size(); ++t) {
    att[t] = frame_labels[t] == PvadClass::kNs ? -1 : frame_speaker[t];
  }
  return att;
}

ConcatUtterance concat_utterances(const std::vector<SourceUtterance>& utts,
                                  const std::string& target_id,
                                  const FeatureConfig& fcfg) {
  if (utts.empty()) throw DataError("concat_utterances: no source utterances");
  fcfg.validate();
  const int width = fcfg.frame_width_samples();
  const int step = fcfg.frame_step_samples();
  const int head_drop = width - step;

  bool target_found = false;
  for (const auto& u : utts) {
    if (u.audio.sample_rate != utts.front().audio.sample_rate) {
      throw DataError("concat_utterances: sample rate mismatch");
    }
    if (u.speaker_id == target_id) target_found = true;
  }
  if (!target_found) {
    throw DataError("concat_utterances: target speaker '" + target_id +
                    "' not among the source utterances");
  }

  ConcatUtterance out;
  out.audio.sample_rate = utts.front().audio.sample_rate;
  out.target_speaker_id = target_id;

  for (size_t i = 0; i < utts.size(); ++i) {
    const SourceUtterance& u = utts[i];
    const int k = num_frames(u.audio.num_samples(), fcfg);
    if (k < 1) {
      throw DataError("concat_utterances: source '" + u.utterance_id +
                      "' shorter than one frame");
    }
    if (static_cast<int>(u.frame_is_speech.size()) != k) {
      throw ShapeError("concat_utterances: source '" + u.utterance_id + "' has " +
                       std::to_string(u.frame_is_speech.size()) +
                       " labels for " + std::to_string(k) + " frames");
    }
    const int64_t trimmed = static_cast<int64_t>(width) + static_cast<int64_t>(k - 1) * step;
    const int64_t skip = (i == 0) ? 0 : head_drop;

    out.boundaries.push_back(out.audio.num_samples());
    out.speaker_ids.push_back(u.speaker_id);
    out.source_ids.push_back(u.utterance_id);
    out.audio.samples.insert(out.audio.samples.end(),
                             u.audio.samples.begin() + skip,
                             u.audio.samples.begin() + trimmed);

    const bool is_target = u.speaker_id == target_id;
    for (int t = 0; t < k; ++t) {
      const bool speech = u.frame_is_speech[static_cast<size_t>(t)] != 0;
      out.frame_labels.push_back(!speech ? PvadClass::kNs
                                 : is_target ? PvadClass::kTss
                                             : PvadClass::kNtss);
      out.frame_speaker.push_back(static_cast<int>(i));
    }
  }
  return out;
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "white") return NoiseKind::kWhite;
  if (name == "pink") return NoiseKind::kPink;
  if (name == "babble") return NoiseKind::kBabble;
  throw UsageError("unknown noise kind '" + name + "' (want white|pink|babble)");
}

const char* noise_kind_name(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kWhite: return "white";
    case NoiseKind::kPink: return "pink";
    case NoiseKind::kBabble: return "babble";
  }
  throw UsageError("invalid NoiseKind value");
}

namespace {

void normalize_rms(std::vector<float>& x, double target_rms) {
  double sumsq = 0.0;
  for (float v : x) sumsq += static_cast<double>(v) * v;
  const double rms = std::sqrt(sumsq / static_cast<double>(x.size()));
  if (rms <= 0.0) return;
  const float g = static_cast<float>(target_rms / rms);
  for (auto& v : x) v *= g;
}

std::vector<float> white_noise(int64_t n, Rng& rng) {
  std::vector<float> x(static_cast<size_t>(n));
  for (auto& v : x) v = static_cast<float>(0.1 * rng.gaussian());
  return x;
}

std::vector<float> pink_noise(int64_t n, Rng& rng) {
  // Paul Kellett's economy three-pole pinking filter.
  std::vector<float> x(static_cast<size_t>(n));
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  for (auto& v : x) {
    const double w = rng.gaussian();
    b0 = 0.99765 * b0 + w * 0.0990460;
    b1 = 0.96300 * b1 + w * 0.2965164;
    b2 = 0.57000 * b2 + w * 1.0526913;
    v = static_cast<float>(b0 + b1 + b2 + w * 0.1848);
  }
  normalize_rms(x, 0.1);
  return x;
}

std::vector<float> babble_noise(int64_t n, int sample_rate, Rng& rng) {
  constexpr int kVoices = 6;
  std::vector<float> mix(static_cast<size_t>(n), 0.0f);
  for (int v = 0; v < kVoices; ++v) {
    Rng vr = rng.child(static_cast<uint64_t>(v) + 1);
    const Eigen::VectorXf vp = sample_voice_point(vr);
    const VoiceTraits traits = VoiceTraits::from_voice_point(vp);
    const std::vector<double> comb = speaker_harmonic_comb(vr.next_u64());
    const double f0 = traits.f0_hz * std::exp2(vr.uniform(-0.2, 0.2));
    const std::vector<float> table = build_wavetable(traits, comb, f0, 2.0, vr);
    const double syllable_rate = vr.uniform(2.0, 5.0);
    const double am_phase = vr.uniform(0.0, 2.0 * std::numbers::pi);
    const double drift_rate = vr.uniform(0.15, 0.35);
    const double drift_phase = vr.uniform(0.0, 2.0 * std::numbers::pi);
    double phase = 0.0;
    for (int64_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / sample_rate;
      const double f =
          f0 * std::exp2(0.15 * std::sin(2.0 * std::numbers::pi * drift_rate * t +
                                         drift_phase));
      phase += f / sample_rate;
      const double am = std::sin(2.0 * std::numbers::pi * syllable_rate * t + am_phase);
      const double env = am > 0.0 ? am * am : 0.0;
      mix[static_cast<size_t>(i)] +=
          static_cast<float>(table_lookup(table, phase) * env);
    }
  }
  normalize_rms(mix, 0.1);
  return mix;
}

}  // namespace

AudioBuffer gen_noise(NoiseKind kind, int64_t num_samples, int sample_rate,
                      Rng& rng) {
  if (num_samples <= 0) throw ConfigError("gen_noise: num_samples must be > 0");
  AudioBuffer out;
  out.sample_rate = sample_rate;
  switch (kind) {
    case NoiseKind::kWhite:
      out.samples = white_noise(num_samples, rng);
      break;
    case NoiseKind::kPink:
      out.samples = pink_noise(num_samples, rng);
      break;
    case NoiseKind::kBabble:
      out.samples = babble_noise(num_samples, sample_rate, rng);
      break;
  }
  return out;
}

double speech_frame_power(const AudioBuffer& audio,
                          const std::vector<PvadClass>& labels,
                          const FeatureConfig& fcfg) {
  const int width = fcfg.frame_width_samples();
  const int step = fcfg.frame_step_samples();
  const int frames = num_frames(audio.num_samples(), fcfg);
  if (static_cast<int>(labels.size()) != frames) {
    throw ShapeError("speech_frame_power: " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(frames) + " frames");
  }
  double acc = 0.0;
  int64_t speech_frames = 0;
  for (int t = 0; t < frames; ++t) {
    if (labels[static_cast<size_t>(t)] == PvadClass::kNs) continue;
    const int64_t lo = static_cast<int64_t>(t) * step;
    double p = 0.0;
    for (int i = 0; i < width; ++i) {
      const double v = audio.samples[static_cast<size_t>(lo + i)];
      p += v * v;
    }
    acc += p / width;
    speech_frames += 1;
  }
  if (speech_frames == 0) {
    throw DataError("speech_frame_power: no speech-labeled frames");
  }
  return acc / static_cast<double>(speech_frames);
}

MixDetail mix_noise_detailed(const ConcatUtterance& u, const AudioBuffer& noise,
                             double snr_db) {
  MixDetail detail;
  if (std::isinf(snr_db) && snr_db > 0.0) {  // no-noise sentinel
    detail.mixed = u;
    detail.signal_component = u.audio.samples;
    detail.noise_component.assign(u.audio.samples.size(), 0.0f);
    return detail;
  }
  if (!std::isfinite(snr_db)) throw DataError("mix_noise: non-finite SNR");
  if (noise.sample_rate != u.audio.sample_rate) {
    throw DataError("mix_noise: noise sample rate mismatch");
  }
  const int64_t n = u.audio.num_samples();
  const int64_t nn = noise.num_samples();
  if (nn <= 0) throw DataError("mix_noise: empty noise");

  std::vector<float> scaled_noise(static_cast<size_t>(n));
  double noise_sumsq = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const float v = noise.samples[static_cast<size_t>(i % nn)];
    scaled_noise[static_cast<size_t>(i)] = v;
    noise_sumsq += static_cast<double>(v) * v;
  }
  const double p_noise = noise_sumsq / static_cast<double>(n);
  if (p_noise <= 0.0) throw DataError("mix_noise: zero-power noise");

  const double p_speech = speech_frame_power(u.audio, u.frame_labels);
  const float scale = static_cast<float>(
      std::sqrt(p_speech / (p_noise * std::pow(10.0, snr_db / 10.0))));
  for (auto& v : scaled_noise) v *= scale;

  detail.signal_component = u.audio.samples;
  detail.noise_component = std::move(scaled_noise);

  float peak = 0.0f;
  std::vector<float> mixed(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    const size_t k = static_cast<size_t>(i);
    mixed[k] = detail.signal_component[k] + detail.noise_component[k];
    peak = std::max(peak, std::abs(mixed[k]));
  }
  // Uniform attenuation preserves the SNR exactly while avoiding clipping.
  if (peak > 0.995f) {
    const float g = 0.995f / peak;
    for (int64_t i = 0; i < n; ++i) {
      const size_t k = static_cast<size_t>(i);
      detail.signal_component[k] *= g;
      detail.noise_component[k] *= g;
      mixed[k] = detail.signal_component[k] + detail.noise_component[k];
    }
  }
  detail.mixed = u;
  detail.mixed.audio.samples = std::move(mixed);
  return detail;
}

ConcatUtterance mix_noise(const ConcatUtterance& u, const AudioBuffer& noise,
                          double snr_db) {
  return mix_noise_detailed(u, noise, snr_db).mixed;
}

ConcatUtterance apply_reverb(const ConcatUtterance& u, double decay_ms,
                             uint64_t seed) {
  if (!(decay_ms > 0.0)) throw ConfigError("apply_reverb: decay_ms must be > 0");
  const int sr = u.audio.sample_rate;
  const int64_t rir_len = std::llround(decay_ms / 1000.0 * sr);
  ConcatUtterance out = u;
  if (rir_len < 1) return out;

  Rng rng(hash_combine(seed, hash_str("reverb")));
  // -60 dB at decay_ms; late-field level shrinks with short decays so the
  // impulse limit is the identity.
  const double sigma = 0.3 * std::min(1.0, std::sqrt(decay_ms / 200.0));
  std::vector<float> rir(static_cast<size_t>(rir_len) + 1);
  rir[0] = 1.0f;
  for (int64_t i = 1; i <= rir_len; ++i) {
    const double env = std::exp(-6.90776 * static_cast<double>(i) / rir_len);
    rir[static_cast<size_t>(i)] = static_cast<float>(sigma * env * rng.gaussian());
  }

  std::vector<float> wet = fft_convolve(u.audio.samples, rir);
  wet.resize(u.audio.samples.size());

  float peak_in = 0.0f, peak_out = 0.0f;
  for (float v : u.audio.samples) peak_in = std::max(peak_in, std::abs(v));
  for (float v : wet) peak_out = std::max(peak_out, std::abs(v));
  if (peak_out > 0.0f && peak_in > 0.0f) {
    const float g = peak_in / peak_out;
    for (auto& v : wet) v *= g;
  }
  out.audio.samples = std::move(wet);
  return out;
}

ConcatUtterance apply_augment(const ConcatUtterance& clean,
                              const AugmentSpec& spec) {
  ConcatUtterance out = clean;
  if (spec.reverb_decay_ms > 0.0) {
    out = apply_reverb(out, spec.reverb_decay_ms, spec.seed);
  }
  if (spec.snr_db.has_value()) {
    Rng rng(hash_combine(spec.seed, hash_str("noise")));
    const AudioBuffer noise = gen_noise(spec.noise_kind, out.audio.num_samples(),
                                        out.audio.sample_rate, rng);
    out = mix_noise(out, noise, *spec.snr_db);
  }
  return out;
}

}  // namespace pvad
