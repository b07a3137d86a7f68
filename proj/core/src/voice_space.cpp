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

#include "pvad/voice_space.hpp"

#include <cmath>

#include "pvad/errors.hpp"

namespace pvad {

const Eigen::MatrixXf& trait_basis() {
  static const Eigen::MatrixXf basis = [] {
    Rng rng(hash_str("pvad/voice-trait-basis/v1"));
    Eigen::MatrixXd b(kTraitDim, kEmbeddingDim);
    for (int i = 0; i < kTraitDim; ++i) {
      for (int j = 0; j < kEmbeddingDim; ++j) {
        b(i, j) = rng.gaussian();
      }
    }
    // Modified Gram-Schmidt; 6 random 256-dim rows are never degenerate.
    for (int i = 0; i < kTraitDim; ++i) {
      for (int k = 0; k < i; ++k) {
        b.row(i) -= b.row(i).dot(b.row(k)) * b.row(k);
      }
      b.row(i) /= b.row(i).norm();
    }
    return Eigen::MatrixXf(b.cast<float>());
  }();
  return basis;
}

Eigen::VectorXf normalized(const Eigen::VectorXf& v) {
  const float n = v.norm();
  if (!(n > 0.0f) || !std::isfinite(n)) {
    throw DataError("normalized: vector has zero or non-finite norm");
  }
  return v / n;
}

float cosine(const Eigen::VectorXf& a, const Eigen::VectorXf& b) {
  if (a.size() != b.size()) {
    throw ShapeError("cosine: dimension mismatch " + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()));
  }
  const float na = a.norm();
  const float nb = b.norm();
  if (!(na > 0.0f) || !(nb > 0.0f)) {
    throw DataError("cosine: zero-norm input");
  }
  const float c = a.dot(b) / (na * nb);
  return std::clamp(c, -1.0f, 1.0f);
}

Eigen::VectorXf sample_voice_point(Rng& rng) {
  const Eigen::MatrixXf& basis = trait_basis();

  Eigen::VectorXf traits(kTraitDim);
  for (int i = 0; i < kTraitDim; ++i) {
    traits(i) = static_cast<float>(rng.gaussian());
  }
  Eigen::VectorXf identity = normalized(basis.transpose() * traits);

  Eigen::VectorXf residual(kEmbeddingDim);
  for (int i = 0; i < kEmbeddingDim; ++i) {
    residual(i) = static_cast<float>(rng.gaussian());
  }
  // Remove the trait-subspace component so the split is exact.
  residual -= basis.transpose() * (basis * residual);
  residual = normalized(residual);

  const float wt = static_cast<float>(std::sqrt(kTraitEnergy));
  const float wr = static_cast<float>(std::sqrt(1.0 - kTraitEnergy));
  return normalized(wt * identity + wr * residual);
}

Eigen::VectorXf trait_coords(const Eigen::VectorXf& voice_point) {
  if (voice_point.size() != kEmbeddingDim) {
    throw ShapeError("trait_coords: expected " +
                     std::to_string(kEmbeddingDim) + "-dim voice point");
  }
  Eigen::VectorXf proj = trait_basis() * voice_point;
  const float n = proj.norm();
  if (!(n > 0.0f)) {
    throw DataError("trait_coords: voice point orthogonal to trait basis");
  }
  return proj * (std::sqrt(static_cast<float>(kTraitDim)) / n);
}

VoiceTraits VoiceTraits::from_voice_point(const Eigen::VectorXf& voice_point) {
  const Eigen::VectorXf t = trait_coords(voice_point);
  auto squash = [](float x) { return std::tanh(0.8 * static_cast<double>(x)); };
  VoiceTraits v;
  v.f0_hz = 135.0 * std::exp2(0.55 * squash(t(0)));
  v.formant1_hz = 650.0 * std::exp2(0.8 * squash(t(1)));
  v.formant2_hz = 2300.0 * std::exp2(0.55 * squash(t(2)));
  v.tilt_db_per_octave = -5.5 + 3.5 * squash(t(3));
  v.formant_gain_db = 6.0 + 4.0 * squash(t(4));
  v.breathiness = 0.02 + 0.015 * (1.0 + squash(t(5)));
  return v;
}

}  // namespace pvad
