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

#include "pvad/nn.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

#include "pvad/errors.hpp"
#include "pvad/rng.hpp"

using namespace pvad;

namespace {

double sigmoid_ref(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_CASE("nn: parameter counts for the deployed dimensions") {
  Rng rng(1);
  // 40 mel + 256 embedding
  const auto et = init_network<float>(296, 3, rng, 64, 64);
  CHECK(param_count(et) == 129795);
  // 40 mel + 1 score
  const auto st = init_network<float>(41, 3, rng, 64, 64);
  CHECK(param_count(st) == 64515);
  // 40 mel + 256 embedding + 1 score
  const auto set = init_network<float>(297, 3, rng, 64, 64);
  CHECK(param_count(set) == 130051);
  // 2-class standard VAD
  const auto vad = init_network<float>(40, 2, rng, 64, 64);
  CHECK(param_count(vad) == 64194);
}

TEST_CASE("nn: init ranges, forget bias and determinism") {
  Rng rng(2);
  const auto p = init_network<double>(10, 3, rng, 8, 6);
  CHECK(p.input_dim() == 10);
  CHECK(p.hidden_dim() == 8);
  CHECK(p.fc_dim() == 6);
  CHECK(p.num_classes() == 3);

  const double k_ih = 1.0 / std::sqrt(10.0);
  CHECK(p.lstm1.w_ih.maxCoeff() <= k_ih);
  CHECK(p.lstm1.w_ih.minCoeff() >= -k_ih);
  const double k_hh = 1.0 / std::sqrt(8.0);
  CHECK(p.lstm1.w_hh.maxCoeff() <= k_hh);
  CHECK(p.lstm1.w_hh.minCoeff() >= -k_hh);

  // Bias: zero except the forget-gate block, which starts at one.
  for (int i = 0; i < 32; ++i) {
    const double expect = (i >= 8 && i < 16) ? 1.0 : 0.0;
    CHECK(p.lstm1.b(i) == expect);
    CHECK(p.lstm2.b(i) == expect);
  }
  CHECK(p.fc.b.cwiseAbs().maxCoeff() == 0.0);
  CHECK(p.head.b.cwiseAbs().maxCoeff() == 0.0);

  Rng rng2(2);
  const auto q = init_network<double>(10, 3, rng2, 8, 6);
  CHECK((p.lstm1.w_ih - q.lstm1.w_ih).cwiseAbs().maxCoeff() == 0.0);
  CHECK((p.head.w - q.head.w).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(init_network<float>(0, 3, rng, 8, 6), ConfigError);
}

TEST_CASE("nn: tensor_refs exposes every parameter once, in order") {
  Rng rng(3);
  auto p = init_network<float>(5, 3, rng, 4, 4);
  auto refs = tensor_refs(p);
  REQUIRE(refs.size() == 10);
  const char* expected[] = {"lstm1.w_ih", "lstm1.w_hh", "lstm1.b",
                            "lstm2.w_ih", "lstm2.w_hh", "lstm2.b",
                            "fc.w",       "fc.b",       "head.w", "head.b"};
  int64_t total = 0;
  for (std::size_t k = 0; k < refs.size(); ++k) {
    CHECK(refs[k].name == expected[k]);
    total += refs[k].size();
  }
  CHECK(total == param_count(p));

  // Mutation through a ref lands in the owning struct.
  refs[9].data[0] = 42.0f;
  CHECK(p.head.b(0) == 42.0f);

  // Const overload views the same memory.
  const auto& cp = p;
  auto crefs = tensor_refs(cp);
  CHECK(crefs[9].data[0] == 42.0f);
}

TEST_CASE("nn: lstm cell matches a naive reference") {
  Rng rng(4);
  const int H = 2, D = 3;
  auto lp = init_network<double>(D, 2, rng, H, 2).lstm1;

  LstmState<double> s;
  s.reset(H);
  VecX<double> c_ref = VecX<double>::Zero(H);
  VecX<double> h_ref = VecX<double>::Zero(H);

  Rng xr(5);
  for (int t = 0; t < 7; ++t) {
    VecX<double> x(D);
    for (int i = 0; i < D; ++i) x(i) = xr.uniform(-1, 1);

    // Reference: gate order {input, forget, cell, output} in 4H rows.
    VecX<double> pre = lp.b;
    pre += lp.w_ih * x + lp.w_hh * h_ref;
    for (int j = 0; j < H; ++j) {
      const double ig = sigmoid_ref(pre(j));
      const double fg = sigmoid_ref(pre(H + j));
      const double gg = std::tanh(pre(2 * H + j));
      const double og = sigmoid_ref(pre(3 * H + j));
      c_ref(j) = fg * c_ref(j) + ig * gg;
      h_ref(j) = og * std::tanh(c_ref(j));
    }

    LstmGates<double> gates;
    lstm_cell_step<double>(lp, x, s, &gates);
    for (int j = 0; j < H; ++j) {
      CHECK(s.c(j) == doctest::Approx(c_ref(j)).epsilon(1e-12));
      CHECK(s.h(j) == doctest::Approx(h_ref(j)).epsilon(1e-12));
    }
    CHECK(gates.i.size() == H);
    CHECK(gates.tanh_c.size() == H);
  }

  VecX<double> bad(D + 1);
  bad.setZero();
  CHECK_THROWS_AS(lstm_cell_step<double>(lp, bad, s, nullptr), ShapeError);
}

TEST_CASE("nn: forward_sequence equals manual stepping") {
  Rng rng(6);
  const auto p = init_network<float>(8, 3, rng, 4, 4);
  MatX<float> inputs(8, 9);
  Rng xr(7);
  for (int t = 0; t < 9; ++t)
    for (int i = 0; i < 8; ++i) inputs(i, t) = float(xr.uniform(-1, 1));

  const auto logits = forward_sequence(p, inputs);
  REQUIRE(logits.rows() == 3);
  REQUIRE(logits.cols() == 9);

  NetworkState<float> state;
  state.reset(p.hidden_dim());
  for (int t = 0; t < 9; ++t) {
    const VecX<float> z = network_step<float>(p, state, inputs.col(t));
    for (int k = 0; k < 3; ++k) CHECK(z(k) == logits(k, t));
  }
}

TEST_CASE("nn: forward_sequence edge cases") {
  Rng rng(8);
  const auto p = init_network<float>(8, 3, rng, 4, 4);
  const auto empty = forward_sequence(p, MatX<float>(8, 0));
  CHECK(empty.rows() == 3);
  CHECK(empty.cols() == 0);
  CHECK_THROWS_AS(forward_sequence(p, MatX<float>(7, 2)), ShapeError);
}

TEST_CASE("nn: forward_traced agrees with forward_sequence") {
  Rng rng(9);
  const auto p = init_network<double>(6, 3, rng, 4, 4);
  MatX<double> inputs(6, 5);
  Rng xr(10);
  for (int t = 0; t < 5; ++t)
    for (int i = 0; i < 6; ++i) inputs(i, t) = xr.uniform(-1, 1);

  const auto trace = forward_traced(p, inputs);
  const auto logits = forward_sequence(p, inputs);
  CHECK((trace.logits - logits).cwiseAbs().maxCoeff() == 0.0);
  CHECK(trace.h1.cols() == 5);
  CHECK(trace.r.cols() == 5);
  // ReLU trace consistency.
  CHECK((trace.r - trace.a.cwiseMax(0.0)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("nn: gradient set arithmetic") {
  Rng rng(11);
  const auto p = init_network<double>(4, 2, rng, 3, 3);
  auto g = zeros_like(p);
  CHECK(global_grad_norm(g) == 0.0);

  add_scaled(g, p, 2.0);
  CHECK(g.head.w(0, 0) == doctest::Approx(2.0 * p.head.w(0, 0)));

  scale_gradients(g, 0.5);
  CHECK(g.head.w(0, 0) == doctest::Approx(p.head.w(0, 0)));

  double sq = 0.0;
  for (const auto& t : tensor_refs(g))
    for (int64_t i = 0; i < t.size(); ++i) sq += t.data[i] * t.data[i];
  CHECK(global_grad_norm(g) == doctest::Approx(std::sqrt(sq)).epsilon(1e-12));
}

TEST_CASE("nn: clip_global_norm semantics") {
  Rng rng(12);
  const auto p = init_network<double>(4, 2, rng, 3, 3);
  auto g = zeros_like(p);
  add_scaled(g, p, 1.0);

  const double before = global_grad_norm(g);
  auto g2 = g;
  const double reported = clip_global_norm(g2, before * 2.0);
  CHECK(reported == doctest::Approx(before).epsilon(1e-12));
  // Under the bound: untouched.
  CHECK((g2.head.w - g.head.w).cwiseAbs().maxCoeff() == 0.0);

  auto g3 = g;
  const double reported3 = clip_global_norm(g3, before / 4.0);
  CHECK(reported3 == doctest::Approx(before).epsilon(1e-12));
  CHECK(global_grad_norm(g3) == doctest::Approx(before / 4.0).epsilon(1e-9));
}

TEST_CASE("nn: adam first step has closed form") {
  Rng rng(13);
  auto p = init_network<double>(4, 2, rng, 3, 3);
  const auto p0 = p;
  auto g = zeros_like(p);
  // Constant gradient everywhere.
  for (auto& t : tensor_refs(g))
    for (int64_t i = 0; i < t.size(); ++i) t.data[i] = 0.5;

  AdamConfig cfg;
  cfg.lr = 1e-3;
  AdamState<double> state;
  adam_update(p, g, state, cfg);
  CHECK(state.step == 1);

  // Step 1: mhat = grad, vhat = grad^2, so dp = -lr * g / (|g| + eps).
  const double expect = -cfg.lr * 0.5 / (0.5 + cfg.eps);
  auto refs_new = tensor_refs(p);
  auto refs_old = tensor_refs(p0);
  for (std::size_t k = 0; k < refs_new.size(); ++k) {
    for (int64_t i = 0; i < refs_new[k].size(); ++i) {
      CHECK(refs_new[k].data[i] - refs_old[k].data[i] ==
            doctest::Approx(expect).epsilon(1e-10));
    }
  }
}

TEST_CASE("nn: adam matches a scalar reference over several steps") {
  Rng rng(14);
  auto p = init_network<double>(2, 2, rng, 2, 2);
  AdamConfig cfg;
  cfg.lr = 0.01;
  AdamState<double> state;

  // Track one coordinate against a hand-rolled scalar Adam.
  double theta = p.head.w(0, 0);
  double m = 0.0, v = 0.0;
  Rng gr(15);
  for (int step = 1; step <= 10; ++step) {
    const double grad = gr.uniform(-1, 1);
    auto g = zeros_like(p);
    g.head.w(0, 0) = grad;
    adam_update(p, g, state, cfg);

    m = cfg.beta1 * m + (1 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1 - cfg.beta2) * grad * grad;
    const double mhat = m / (1 - std::pow(cfg.beta1, step));
    const double vhat = v / (1 - std::pow(cfg.beta2, step));
    theta -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    CHECK(p.head.w(0, 0) == doctest::Approx(theta).epsilon(1e-12));
  }
  CHECK(state.step == 10);
}

TEST_CASE("nn: softmax is normalized, stable and order-preserving") {
  VecX<float> z(3);
  z << 1.0f, 2.0f, 3.0f;
  const auto s = softmax<float>(z);
  CHECK(s.sum() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(s(0) < s(1));
  CHECK(s(1) < s(2));

  VecX<float> big(3);
  big << 1000.0f, 1001.0f, 999.0f;
  const auto sb = softmax<float>(big);
  CHECK(std::isfinite(sb(0)));
  CHECK(sb.sum() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sb(1) > sb(0));

  VecX<double> uniform(4);
  uniform.setConstant(7.0);
  const auto su = softmax<double>(uniform);
  for (int i = 0; i < 4; ++i) CHECK(su(i) == doctest::Approx(0.25).epsilon(1e-12));
}
