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

#include <cmath>

namespace pvad {

double LossWeights::weight_for(int a, int b) const {
  if (a > b) std::swap(a, b);
  if (a == 0 && b == 1) return w_tss_ns;
  if (a == 0 && b == 2) return w_tss_ntss;
  if (a == 1 && b == 2) return w_ns_ntss;
  throw ConfigError("weight_for: class pair (" + std::to_string(a) + "," +
                    std::to_string(b) + ") out of range for 3 classes");
}

namespace {

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

template <typename Scalar>
LossResult<Scalar> ce_loss(const Eigen::Ref<const VecX<Scalar>>& logits,
                           int label) {
  const int c = static_cast<int>(logits.size());
  if (label < 0 || label >= c) {
    throw DataError("ce_loss: label " + std::to_string(label) +
                    " out of range for " + std::to_string(c) + " classes");
  }
  const double mx = static_cast<double>(logits.maxCoeff());
  double sum = 0.0;
  for (int k = 0; k < c; ++k) {
    sum += std::exp(static_cast<double>(logits(k)) - mx);
  }
  const double lse = mx + std::log(sum);

  LossResult<Scalar> out;
  out.loss = lse - static_cast<double>(logits(label));
  out.dlogits.resize(c);
  for (int k = 0; k < c; ++k) {
    const double p = std::exp(static_cast<double>(logits(k)) - lse);
    out.dlogits(k) = static_cast<Scalar>(p - (k == label ? 1.0 : 0.0));
  }
  return out;
}

template <typename Scalar>
LossResult<Scalar> wpl_loss(const Eigen::Ref<const VecX<Scalar>>& logits,
                            int label, const LossWeights& weights,
                            PairReduction reduction) {
  const int c = static_cast<int>(logits.size());
  if (label < 0 || label >= c) {
    throw DataError("wpl_loss: label " + std::to_string(label) +
                    " out of range for " + std::to_string(c) + " classes");
  }
  if (c < 2) throw ShapeError("wpl_loss: need at least 2 classes");

  const double denom =
      (reduction == PairReduction::kMean) ? static_cast<double>(c - 1) : 1.0;

  LossResult<Scalar> out;
  out.dlogits = VecX<Scalar>::Zero(c);
  const double zy = static_cast<double>(logits(label));
  double acc = 0.0;
  double dzy = 0.0;
  for (int k = 0; k < c; ++k) {
    if (k == label) continue;
    const double w = weights.weight_for(k, label);
    const double diff = static_cast<double>(logits(k)) - zy;
    acc += w * softplus(diff);
    const double s = w * sigmoid(diff);
    out.dlogits(k) = static_cast<Scalar>(s / denom);
    dzy -= s;
  }
  out.loss = acc / denom;
  out.dlogits(label) = static_cast<Scalar>(dzy / denom);
  return out;
}

template <typename Scalar>
SequenceLossResult<Scalar> sequence_loss(const MatX<Scalar>& logits,
                                         const std::vector<int>& labels,
                                         LossKind kind,
                                         const LossWeights& weights,
                                         PairReduction reduction) {
  const Eigen::Index T = logits.cols();
  if (static_cast<Eigen::Index>(labels.size()) != T) {
    throw ShapeError("sequence_loss: " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(T) + " frames");
  }
  if (T == 0) throw DataError("sequence_loss: empty sequence");

  SequenceLossResult<Scalar> out;
  out.dlogits.resize(logits.rows(), T);
  const Scalar inv_t = Scalar{1} / static_cast<Scalar>(T);
  double sum = 0.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    LossResult<Scalar> r =
        (kind == LossKind::kCrossEntropy)
            ? ce_loss<Scalar>(logits.col(t), labels[static_cast<size_t>(t)])
            : wpl_loss<Scalar>(logits.col(t), labels[static_cast<size_t>(t)],
                               weights, reduction);
    sum += r.loss;
    out.dlogits.col(t) = r.dlogits * inv_t;
  }
  out.loss = sum / static_cast<double>(T);
  return out;
}

#define PVAD_INSTANTIATE_LOSSES(S)                                          \
  template LossResult<S> ce_loss<S>(const Eigen::Ref<const VecX<S>>&, int); \
  template LossResult<S> wpl_loss<S>(const Eigen::Ref<const VecX<S>>&, int, \
                                     const LossWeights&, PairReduction);    \
  template SequenceLossResult<S> sequence_loss<S>(                          \
      const MatX<S>&, const std::vector<int>&, LossKind, const LossWeights&, \
      PairReduction);

PVAD_INSTANTIATE_LOSSES(float)
PVAD_INSTANTIATE_LOSSES(double)

#undef PVAD_INSTANTIATE_LOSSES

}  // namespace pvad
