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

#include "pvad/rng.hpp"

namespace pvad {

inline constexpr int kEmbeddingDim = 256;

/// Dimension of the shared voice-trait subspace. Every synthetic speaker's
/// identity vector puts most of its energy here, and the audible timbre
/// parameters are functions of the trait coordinates. That coupling is what
/// lets an embedding-conditioned model trained on a handful of speakers
/// generalize to unseen ones: nearby embeddings sound alike.
inline constexpr int kTraitDim = 6;

/// Fraction of a voice point's squared norm that lies in the trait
/// subspace; the rest is a speaker-unique residual.
inline constexpr double kTraitEnergy = 0.72;

/// Fixed orthonormal trait basis, rows kTraitDim x kEmbeddingDim.
/// Built deterministically once per process from a hard-coded seed.
const Eigen::MatrixXf& trait_basis();

Eigen::VectorXf normalized(const Eigen::VectorXf& v);

/// Cosine similarity of two unit-norm vectors. Throws on zero norm.
float cosine(const Eigen::VectorXf& a, const Eigen::VectorXf& b);

/// Draws a unit-norm voice identity vector: sqrt(kTraitEnergy) in the
/// trait subspace plus sqrt(1 - kTraitEnergy) orthogonal residual.
Eigen::VectorXf sample_voice_point(Rng& rng);

/// Trait coordinates of a voice point: its trait-subspace projection
/// normalized to a unit 6-vector and rescaled by sqrt(kTraitDim) so the
/// components are O(1).
Eigen::VectorXf trait_coords(const Eigen::VectorXf& voice_point);

/// Audible voice characteristics derived from a voice point. Ranges are
/// chosen to span plausible adult voices while keeping speakers distinct.
struct VoiceTraits {
  double f0_hz = 135.0;            // base pitch
  double formant1_hz = 650.0;      // first resonance center
  double formant2_hz = 2300.0;     // second resonance center
  double tilt_db_per_octave = -5.5;
  double formant_gain_db = 6.0;
  double breathiness = 0.03;       // aspiration noise relative amplitude

  static VoiceTraits from_voice_point(const Eigen::VectorXf& voice_point);
};

}  // namespace pvad
