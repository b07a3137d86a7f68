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

#include <vector>

#include "pvad/nn.hpp"

namespace pvad {

enum class LossKind { kCrossEntropy, kWeightedPairwise };

/// How the per-pair terms of the weighted pairwise loss are combined:
/// mean over the C-1 wrong classes (the default) or their plain sum.
enum class PairReduction { kMean, kSum };

/// Symmetric pair weights for the 3-class task. Class indices follow the
/// logit order tss=0, ns=1, ntss=2. Confusions involving the target
/// speaker keep full weight; the ns/ntss pair is discounted because both
/// map to "no target speech" downstream.
struct LossWeights {
  double w_tss_ns = 1.0;
  double w_tss_ntss = 1.0;
  double w_ns_ntss = 0.1;

  double weight_for(int a, int b) const;
};

template <typename Scalar>
struct LossResult {
  double loss = 0.0;
  VecX<Scalar> dlogits;
};

/// Softmax cross-entropy for one frame: logsumexp(z) - z[label].
template <typename Scalar>
LossResult<Scalar> ce_loss(const Eigen::Ref<const VecX<Scalar>>& logits,
                           int label);

/// Weighted pairwise loss for one frame: the reduction over wrong classes
/// k != y of w_<k,y> * log(1 + exp(z_k - z_y)).
template <typename Scalar>
LossResult<Scalar> wpl_loss(const Eigen::Ref<const VecX<Scalar>>& logits,
                            int label, const LossWeights& weights,
                            PairReduction reduction = PairReduction::kMean);

template <typename Scalar>
struct SequenceLossResult {
  double loss = 0.0;        // mean per-frame loss
  MatX<Scalar> dlogits;     // gradient of the mean, num_classes x T
};

/// Mean per-frame loss over an utterance. dlogits already carries the 1/T
/// factor, so it backpropagates the mean directly.
template <typename Scalar>
SequenceLossResult<Scalar> sequence_loss(
    const MatX<Scalar>& logits, const std::vector<int>& labels, LossKind kind,
    const LossWeights& weights = {},
    PairReduction reduction = PairReduction::kMean);

}  // namespace pvad
