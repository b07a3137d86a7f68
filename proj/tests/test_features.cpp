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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "pvad/errors.hpp"
#include "pvad/rng.hpp"

using namespace pvad;

TEST_CASE("features: frame geometry at 16 kHz") {
  FeatureConfig cfg;
  CHECK(cfg.frame_width_samples() == 400);
  CHECK(cfg.frame_step_samples() == 160);
  CHECK(cfg.effective_fft_size() == 512);

  // floor((N - width) / step) + 1
  CHECK(num_frames(16000, cfg) == 98);
  CHECK(num_frames(400, cfg) == 1);
  CHECK(num_frames(399, cfg) == 0);
  CHECK(num_frames(560, cfg) == 2);
  CHECK(num_frames(559, cfg) == 1);
  CHECK(num_frames(0, cfg) == 0);
}

TEST_CASE("features: config validation") {
  FeatureConfig cfg;
  CHECK_NOTHROW(cfg.validate());

  FeatureConfig bad = cfg;
  bad.sample_rate = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = cfg;
  bad.num_mel_bins = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = cfg;
  bad.mel_low_hz = 8000.0;  // above mel_high_hz
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = cfg;
  bad.fft_size = 300;  // not a power of two
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = cfg;
  bad.fft_size = 256;  // smaller than the frame width
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("features: mel scale round trip and anchor") {
  // 1000 Hz -> 2595 * log10(1 + 1000/700)
  CHECK(hz_to_mel(1000.0) ==
        doctest::Approx(2595.0 * std::log10(1.0 + 1000.0 / 700.0)).epsilon(1e-12));
  CHECK(hz_to_mel(0.0) == doctest::Approx(0.0));
  for (double hz : {125.0, 440.0, 3000.0, 7500.0}) {
    CHECK(mel_from_hz(hz_to_mel(hz)) == doctest::Approx(hz).epsilon(1e-10));
  }
}

TEST_CASE("features: filterbank shape and coverage") {
  FeatureConfig cfg;
  const auto fb = build_mel_filterbank(cfg);
  CHECK(fb.rows() == 40);
  CHECK(fb.cols() == 257);
  CHECK(fb.minCoeff() >= 0.0);
  for (int m = 0; m < fb.rows(); ++m) {
    CHECK(fb.row(m).sum() > 0.0);
  }
}

TEST_CASE("features: silence maps to the log floor") {
  FeatureExtractor fx;
  std::vector<float> silence(1600, 0.0f);
  const auto feats = fx.extract(silence);
  CHECK(feats.rows() == 40);
  CHECK(feats.cols() == num_frames(1600, fx.config()));
  const float expected = std::log(1e-10f);
  for (int t = 0; t < feats.cols(); ++t)
    for (int m = 0; m < feats.rows(); ++m)
      CHECK(feats(m, t) == doctest::Approx(expected).epsilon(1e-5));
}

TEST_CASE("features: louder signal raises every bin") {
  FeatureExtractor fx;
  Rng rng(5);
  std::vector<float> quiet(3200), loud(3200);
  for (std::size_t i = 0; i < quiet.size(); ++i) {
    const float v = float(rng.uniform(-1, 1));
    quiet[i] = 0.01f * v;
    loud[i] = 0.5f * v;
  }
  const auto fq = fx.extract(quiet);
  const auto fl = fx.extract(loud);
  // log power scales by log(gain^2); identical shape otherwise.
  const float shift = 2.0f * std::log(50.0f);
  for (int t = 0; t < fq.cols(); ++t)
    for (int m = 0; m < fq.rows(); ++m)
      CHECK(fl(m, t) - fq(m, t) == doctest::Approx(shift).epsilon(1e-3));
}

TEST_CASE("features: extract_frame equals the matching extract column") {
  FeatureExtractor fx;
  Rng rng(6);
  std::vector<float> sig(1200);
  for (auto& v : sig) v = float(rng.uniform(-0.5, 0.5));
  const auto full = fx.extract(sig);
  const int width = fx.config().frame_width_samples();
  const int step = fx.config().frame_step_samples();
  for (int t = 0; t < full.cols(); ++t) {
    const auto one = fx.extract_frame(
        std::span<const float>(sig.data() + int64_t(t) * step, width));
    REQUIRE(one.size() == full.rows());
    for (int m = 0; m < full.rows(); ++m) {
      // Bit-identical: same code path per frame.
      CHECK(one(m) == full(m, t));
    }
  }
}

TEST_CASE("features: extract_frame rejects wrong sizes") {
  FeatureExtractor fx;
  std::vector<float> frame(399, 0.0f);
  CHECK_THROWS_AS(fx.extract_frame(frame), ShapeError);
}

TEST_CASE("features: signal shorter than one frame is rejected") {
  FeatureExtractor fx;
  std::vector<float> tiny(100, 0.0f);
  CHECK_THROWS_AS(fx.extract(tiny), DataError);
}

TEST_CASE("features: tone concentrates energy near its mel band") {
  FeatureExtractor fx;
  const double f = 1000.0;
  std::vector<float> sig(4800);
  for (std::size_t i = 0; i < sig.size(); ++i)
    sig[i] = 0.5f * std::sin(2.0 * M_PI * f * double(i) / 16000.0);
  const auto feats = fx.extract(sig);
  Eigen::Index best;
  feats.col(feats.cols() / 2).maxCoeff(&best);
  // The peak bin's center frequency should be near 1 kHz.
  const FeatureConfig cfg;
  const double mel_lo = hz_to_mel(cfg.mel_low_hz);
  const double mel_hi = hz_to_mel(cfg.mel_high_hz);
  const double center_mel =
      mel_lo + (mel_hi - mel_lo) * double(best + 1) / (cfg.num_mel_bins + 1);
  const double center_hz = mel_from_hz(center_mel);
  CHECK(center_hz > 700.0);
  CHECK(center_hz < 1400.0);
}
