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

#include <iosfwd>
#include <vector>

#include "pvad/dataset.hpp"
#include "pvad/losses.hpp"
#include "pvad/model.hpp"
#include "pvad/nn.hpp"

namespace pvad {

struct TrainConfig {
  LossKind loss = LossKind::kCrossEntropy;
  LossWeights weights;
  PairReduction reduction = PairReduction::kMean;
  AdamConfig adam;         // lr defaults to 5e-5
  double clip_norm = 5.0;
  int epochs = 2;
  int batch_size = 8;
  int patience = 0;        // epochs without held-out improvement; 0 = off
  uint64_t seed = 1;
  int hidden_dim = 64;
  int fc_dim = 64;
  std::ostream* log = nullptr;  // per-epoch lines when set

  void validate() const;
};

struct TrainResult {
  NetworkParams<float> params;          // best by held-out metric, else final
  std::vector<double> epoch_train_loss;
  std::vector<double> epoch_heldout;    // micro mAP (or speech AP for VAD)
  int best_epoch = -1;  // 0-based index into epoch_heldout; -1 without held-out
  int64_t steps = 0;
};

/// Trains an ST/ET/SET network. SC has no trainable personal part (it
/// wraps a standard VAD), so passing kSc is a usage error; train the
/// 2-class net with train_vad instead.
TrainResult train_pvad(ArchitectureKind arch, const TrainConfig& cfg,
                       const std::vector<PreparedUtterance>& train,
                       const std::vector<PreparedUtterance>* heldout = nullptr);

/// Trains the 2-class standard VAD net (also the SC baseline's backbone)
/// on labels collapsed to speech / non-speech.
TrainResult train_vad(const TrainConfig& cfg,
                      const std::vector<PreparedUtterance>& train,
                      const std::vector<PreparedUtterance>* heldout = nullptr);

}  // namespace pvad
