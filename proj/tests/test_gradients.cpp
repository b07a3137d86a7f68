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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "pvad/losses.hpp"
#include "pvad/nn.hpp"
#include "pvad/rng.hpp"

using namespace pvad;

namespace {

double rel_err(double analytic, double numeric) {
  const double denom = std::max(1e-8, std::abs(analytic) + std::abs(numeric));
  return std::abs(analytic - numeric) / denom;
}

// Central difference d loss / d logits(k).
template <typename LossFn>
double fd_logit(LossFn&& fn, VecX<double> z, int k, double h = 1e-6) {
  z(k) += h;
  const double up = fn(z);
  z(k) -= 2 * h;
  const double down = fn(z);
  return (up - down) / (2 * h);
}

}  // namespace

TEST_CASE("gradients: cross entropy matches finite differences") {
  Rng rng(1001);
  for (int trial = 0; trial < 100; ++trial) {
    VecX<double> z(3);
    for (int k = 0; k < 3; ++k) z(k) = rng.uniform(-4.0, 4.0);
    const int label = int(rng.uniform_int(0, 2));

    const auto r = ce_loss<double>(z, label);
    for (int k = 0; k < 3; ++k) {
      const double fd = fd_logit(
          [&](const VecX<double>& v) { return ce_loss<double>(v, label).loss; },
          z, k);
      CHECK(rel_err(r.dlogits(k), fd) < 1e-4);
    }
  }
}

TEST_CASE("gradients: weighted pairwise matches finite differences") {
  Rng rng(1002);
  for (int trial = 0; trial < 100; ++trial) {
    VecX<double> z(3);
    for (int k = 0; k < 3; ++k) z(k) = rng.uniform(-4.0, 4.0);
    const int label = int(rng.uniform_int(0, 2));
    LossWeights w;
    w.w_tss_ns = rng.uniform(0.05, 2.0);
    w.w_tss_ntss = rng.uniform(0.05, 2.0);
    w.w_ns_ntss = rng.uniform(0.05, 2.0);
    const auto reduction =
        trial % 2 == 0 ? PairReduction::kMean : PairReduction::kSum;

    const auto r = wpl_loss<double>(z, label, w, reduction);
    for (int k = 0; k < 3; ++k) {
      const double fd = fd_logit(
          [&](const VecX<double>& v) {
            return wpl_loss<double>(v, label, w, reduction).loss;
          },
          z, k);
      CHECK(rel_err(r.dlogits(k), fd) < 1e-4);
    }
  }
}

TEST_CASE("gradients: sequence loss matches finite differences") {
  Rng rng(1003);
  MatX<double> logits(3, 6);
  std::vector<int> labels;
  for (int t = 0; t < 6; ++t) {
    for (int k = 0; k < 3; ++k) logits(k, t) = rng.uniform(-3.0, 3.0);
    labels.push_back(int(rng.uniform_int(0, 2)));
  }
  for (auto kind : {LossKind::kCrossEntropy, LossKind::kWeightedPairwise}) {
    const auto seq = sequence_loss(logits, labels, kind);
    const double h = 1e-6;
    for (int t = 0; t < 6; ++t) {
      for (int k = 0; k < 3; ++k) {
        auto z = logits;
        z(k, t) += h;
        const double up = sequence_loss(z, labels, kind).loss;
        z(k, t) -= 2 * h;
        const double down = sequence_loss(z, labels, kind).loss;
        CHECK(rel_err(seq.dlogits(k, t), (up - down) / (2 * h)) < 1e-4);
      }
    }
  }
}

TEST_CASE("gradients: backpropagation through time matches finite differences") {
  // Small network, full parameter sweep: 2 stacked LSTM layers, FC, head.
  const int D = 3, H = 4, FC = 4, C = 3, T = 5;
  Rng rng(1004);
  auto params = init_network<double>(D, C, rng, H, FC);

  MatX<double> inputs(D, T);
  std::vector<int> labels;
  Rng xr(1005);
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < D; ++i) inputs(i, t) = xr.uniform(-1.0, 1.0);
    labels.push_back(int(xr.uniform_int(0, C - 1)));
  }

  for (auto kind : {LossKind::kCrossEntropy, LossKind::kWeightedPairwise}) {
    auto loss_of = [&](const NetworkParams<double>& p) {
      const auto logits = forward_sequence(p, inputs);
      return sequence_loss(logits, labels, kind).loss;
    };

    auto grads = zeros_like(params);
    const auto trace = forward_traced(params, inputs);
    const auto seq = sequence_loss(trace.logits, labels, kind);
    backward_sequence(params, trace, seq.dlogits, grads);

    auto work = params;
    auto grefs = tensor_refs(grads);
    auto wrefs = tensor_refs(work);
    const double h = 1e-6;
    double worst = 0.0;
    for (std::size_t k = 0; k < wrefs.size(); ++k) {
      for (int64_t i = 0; i < wrefs[k].size(); ++i) {
        const double saved = wrefs[k].data[i];
        wrefs[k].data[i] = saved + h;
        const double up = loss_of(work);
        wrefs[k].data[i] = saved - h;
        const double down = loss_of(work);
        wrefs[k].data[i] = saved;
        const double fd = (up - down) / (2 * h);
        // Central FD with h=1e-6 resolves gradients down to roughly 1e-10
        // absolute; floor the denominator so near-zero entries compare
        // against that resolution instead of blowing up the ratio.
        const double a = grefs[k].data[i];
        const double denom = std::max(1e-5, std::abs(a) + std::abs(fd));
        worst = std::max(worst, std::abs(a - fd) / denom);
      }
    }
    CHECK(worst < 1e-3);
  }
}

TEST_CASE("gradients: backward accumulates instead of overwriting") {
  const int D = 2, H = 3, T = 4;
  Rng rng(1006);
  const auto params = init_network<double>(D, 3, rng, H, 3);
  MatX<double> inputs(D, T);
  Rng xr(1007);
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < D; ++i) inputs(i, t) = xr.uniform(-1, 1);
  const std::vector<int> labels = {0, 1, 2, 0};

  const auto trace = forward_traced(params, inputs);
  const auto seq = sequence_loss(trace.logits, labels, LossKind::kCrossEntropy);

  auto once = zeros_like(params);
  backward_sequence(params, trace, seq.dlogits, once);
  auto twice = zeros_like(params);
  backward_sequence(params, trace, seq.dlogits, twice);
  backward_sequence(params, trace, seq.dlogits, twice);

  auto r1 = tensor_refs(once);
  auto r2 = tensor_refs(twice);
  for (std::size_t k = 0; k < r1.size(); ++k) {
    for (int64_t i = 0; i < r1[k].size(); ++i) {
      CHECK(r2[k].data[i] == doctest::Approx(2.0 * r1[k].data[i]).epsilon(1e-9));
    }
  }
}
