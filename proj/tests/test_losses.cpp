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

#include "pvad/losses.hpp"

#include <doctest.h>

#include <cmath>

#include "pvad/errors.hpp"
#include "pvad/rng.hpp"

using namespace pvad;

TEST_CASE("losses: cross entropy on uniform logits is ln 3") {
  VecX<double> z = VecX<double>::Zero(3);
  for (int label = 0; label < 3; ++label) {
    const auto r = ce_loss<double>(z, label);
    CHECK(r.loss == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  }
  VecX<double> shifted = VecX<double>::Constant(3, 11.5);
  CHECK(ce_loss<double>(shifted, 1).loss ==
        doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("losses: cross entropy gradient is softmax minus one-hot") {
  VecX<double> z(3);
  z << 0.3, -1.2, 2.0;
  const auto r = ce_loss<double>(z, 2);

  double lse = 0.0;
  const double mx = z.maxCoeff();
  for (int k = 0; k < 3; ++k) lse += std::exp(z(k) - mx);
  lse = mx + std::log(lse);
  for (int k = 0; k < 3; ++k) {
    const double p = std::exp(z(k) - lse);
    const double expect = p - (k == 2 ? 1.0 : 0.0);
    CHECK(r.dlogits(k) == doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK(r.loss == doctest::Approx(lse - z(2)).epsilon(1e-12));
  // Gradient sums to zero (shift invariance).
  CHECK(r.dlogits.sum() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("losses: cross entropy is numerically stable") {
  VecX<double> z(3);
  z << 1000.0, -1000.0, 999.0;
  const auto r = ce_loss<double>(z, 0);
  CHECK(std::isfinite(r.loss));
  CHECK(r.loss < 1.0);
  CHECK_THROWS_AS(ce_loss<double>(z, 3), DataError);
  CHECK_THROWS_AS(ce_loss<double>(z, -1), DataError);
}

TEST_CASE("losses: weighted pairwise on uniform logits, target class") {
  VecX<double> z = VecX<double>::Zero(3);
  LossWeights w;
  // Both pairs involving tss carry weight 1; mean over 2 pairs gives ln 2.
  const auto r = wpl_loss<double>(z, 0, w, PairReduction::kMean);
  CHECK(r.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("losses: weighted pairwise on uniform logits, ns class") {
  VecX<double> z = VecX<double>::Zero(3);
  LossWeights w;
  // Pairs (ns,tss) weight 1 and (ns,ntss) weight 0.1: (1.1/2) ln 2.
  const auto r = wpl_loss<double>(z, 1, w, PairReduction::kMean);
  CHECK(r.loss == doctest::Approx(0.55 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("losses: pair reduction sum is mean times (C-1)") {
  VecX<double> z(3);
  z << 0.7, -0.3, 0.1;
  LossWeights w;
  w.w_ns_ntss = 0.4;
  for (int label = 0; label < 3; ++label) {
    const auto mean = wpl_loss<double>(z, label, w, PairReduction::kMean);
    const auto sum = wpl_loss<double>(z, label, w, PairReduction::kSum);
    CHECK(sum.loss == doctest::Approx(2.0 * mean.loss).epsilon(1e-12));
    for (int k = 0; k < 3; ++k) {
      CHECK(sum.dlogits(k) == doctest::Approx(2.0 * mean.dlogits(k)).epsilon(1e-12));
    }
  }
}

TEST_CASE("losses: wpl decreases as the target logit rises") {
  LossWeights w;
  VecX<double> lo(3), hi(3);
  lo << 0.0, 0.0, 0.0;
  hi << 2.0, 0.0, 0.0;
  CHECK(wpl_loss<double>(hi, 0, w).loss < wpl_loss<double>(lo, 0, w).loss);
}

TEST_CASE("losses: pair weights are symmetric and validated") {
  LossWeights w;
  w.w_tss_ns = 0.3;
  w.w_tss_ntss = 0.7;
  w.w_ns_ntss = 0.9;
  CHECK(w.weight_for(0, 1) == 0.3);
  CHECK(w.weight_for(1, 0) == 0.3);
  CHECK(w.weight_for(0, 2) == 0.7);
  CHECK(w.weight_for(2, 0) == 0.7);
  CHECK(w.weight_for(1, 2) == 0.9);
  CHECK(w.weight_for(2, 1) == 0.9);
  CHECK_THROWS_AS(w.weight_for(0, 3), ConfigError);
  CHECK_THROWS_AS(w.weight_for(-1, 1), ConfigError);
}

TEST_CASE("losses: wpl label validation") {
  VecX<double> z = VecX<double>::Zero(3);
  LossWeights w;
  CHECK_THROWS_AS(wpl_loss<double>(z, 5, w), DataError);
  VecX<double> one = VecX<double>::Zero(1);
  CHECK_THROWS_AS(wpl_loss<double>(one, 0, w), ShapeError);
}

TEST_CASE("losses: sequence loss averages frames and scales gradients") {
  MatX<double> logits(3, 4);
  logits << 0.1, -0.5, 0.2, 1.0,
            0.0, 0.3, -0.2, 0.4,
            -0.1, 0.8, 0.0, -0.6;
  const std::vector<int> labels = {0, 2, 1, 0};

  for (auto kind : {LossKind::kCrossEntropy, LossKind::kWeightedPairwise}) {
    const auto seq = sequence_loss(logits, labels, kind);
    double acc = 0.0;
    for (int t = 0; t < 4; ++t) {
      const VecX<double> col = logits.col(t);
      const auto r = kind == LossKind::kCrossEntropy
                         ? ce_loss<double>(col, labels[t])
                         : wpl_loss<double>(col, labels[t], LossWeights{});
      acc += r.loss;
      for (int k = 0; k < 3; ++k) {
        CHECK(seq.dlogits(k, t) ==
              doctest::Approx(r.dlogits(k) / 4.0).epsilon(1e-12));
      }
    }
    CHECK(seq.loss == doctest::Approx(acc / 4.0).epsilon(1e-12));
  }
}

TEST_CASE("losses: sequence loss validation") {
  MatX<double> logits(3, 2);
  logits.setZero();
  CHECK_THROWS_AS(sequence_loss(logits, {0}, LossKind::kCrossEntropy),
                  ShapeError);
  MatX<double> empty(3, 0);
  CHECK_THROWS_AS(sequence_loss(empty, {}, LossKind::kCrossEntropy), DataError);
  CHECK_THROWS_AS(sequence_loss(logits, {0, 9}, LossKind::kCrossEntropy),
                  DataError);
}

TEST_CASE("losses: single-frame sequence equals the frame loss") {
  MatX<double> logits(3, 1);
  logits << 0.4, -0.2, 0.9;
  const auto seq = sequence_loss(logits, {2}, LossKind::kCrossEntropy);
  const auto one = ce_loss<double>(VecX<double>(logits.col(0)), 2);
  CHECK(seq.loss == doctest::Approx(one.loss).epsilon(1e-12));
  for (int k = 0; k < 3; ++k)
    CHECK(seq.dlogits(k, 0) == doctest::Approx(one.dlogits(k)).epsilon(1e-12));
}
