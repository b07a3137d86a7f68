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

// Microbenchmarks for the streaming path. The interesting number is
// time-per-frame of stream_step: the real-time budget at a 10 ms hop is
// 10 ms/frame, and these run three orders of magnitude under it.

#include <benchmark/benchmark.h>

#include <vector>

#include "pvad/features.hpp"
#include "pvad/model.hpp"
#include "pvad/model_io.hpp"
#include "pvad/nn.hpp"
#include "pvad/rng.hpp"
#include "pvad/voice_space.hpp"

namespace {

using namespace pvad;

ArchitectureKind arch_of(int64_t index) {
  const ArchitectureKind archs[] = {ArchitectureKind::kSc, ArchitectureKind::kSt,
                                    ArchitectureKind::kEt, ArchitectureKind::kSet};
  return archs[index];
}

void BM_StreamStep(benchmark::State& state) {
  const ArchitectureKind arch = arch_of(state.range(0));
  Rng rng(1);
  const NetworkParams<float> net =
      init_network<float>(arch_input_dim(arch), arch_num_classes(arch), rng);

  SpeakerEmbedding target(kEmbeddingDim);
  for (int i = 0; i < kEmbeddingDim; ++i)
    target(i) = static_cast<float>(rng.gaussian());
  target /= target.norm();
  const bool wants_target =
      arch == ArchitectureKind::kEt || arch == ArchitectureKind::kSet;
  const bool wants_scores = arch != ArchitectureKind::kEt;

  Eigen::VectorXf feats(40);
  for (int d = 0; d < 40; ++d) feats(d) = static_cast<float>(rng.gaussian());
  const float score = 0.7f;

  StreamState st = make_stream_state(net, arch, wants_target ? &target : nullptr);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        stream_step(net, st, feats, wants_scores ? &score : nullptr));
  }
  state.SetLabel(arch_name(arch));
}
BENCHMARK(BM_StreamStep)->DenseRange(0, 3);

void BM_ExtractFrame(benchmark::State& state) {
  const FeatureConfig fc;
  FeatureExtractor extractor(fc);
  Rng rng(2);
  std::vector<float> window(static_cast<size_t>(fc.frame_width_samples()));
  for (float& s : window) s = static_cast<float>(rng.gaussian() * 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(extractor.extract_frame(window));
  }
}
BENCHMARK(BM_ExtractFrame);

void BM_LstmCellStep(benchmark::State& state) {
  Rng rng(3);
  const NetworkParams<float> net = init_network<float>(296, 3, rng);
  Eigen::VectorXf x(296);
  for (int d = 0; d < 296; ++d) x(d) = static_cast<float>(rng.gaussian());
  LstmState<float> ls;
  ls.reset(net.hidden_dim());
  for (auto _ : state) {
    lstm_cell_step<float>(net.lstm1, x, ls);
    benchmark::DoNotOptimize(ls.h.data());
  }
}
BENCHMARK(BM_LstmCellStep);

void BM_ForwardSequence(benchmark::State& state) {
  Rng rng(4);
  const NetworkParams<float> net = init_network<float>(296, 3, rng);
  const auto T = static_cast<int>(state.range(0));
  Eigen::MatrixXf inputs(296, T);
  for (int t = 0; t < T; ++t)
    for (int d = 0; d < 296; ++d) inputs(d, t) = static_cast<float>(rng.gaussian());
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward_sequence(net, inputs));
  }
  state.SetItemsProcessed(state.iterations() * T);
}
BENCHMARK(BM_ForwardSequence)->Arg(100)->Arg(500);

void BM_QuantizeDequantize(benchmark::State& state) {
  Rng rng(5);
  const NetworkParams<float> net = init_network<float>(296, 3, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(quantize_dequantize(net));
  }
}
BENCHMARK(BM_QuantizeDequantize);

}  // namespace

BENCHMARK_MAIN();
