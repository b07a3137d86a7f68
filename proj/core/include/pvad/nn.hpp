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
#include <cstdint>
#include <string>
#include <vector>

#include "pvad/errors.hpp"
#include "pvad/rng.hpp"

namespace pvad {

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// One LSTM layer. Gate rows are packed in the order
/// {input, forget, cell, output}, each block of hidden_dim rows.
template <typename Scalar>
struct LstmParams {
  MatX<Scalar> w_ih;  // 4H x input_dim
  MatX<Scalar> w_hh;  // 4H x H
  VecX<Scalar> b;     // 4H

  int hidden_dim() const { return static_cast<int>(w_hh.cols()); }
  int input_dim() const { return static_cast<int>(w_ih.cols()); }
};

template <typename Scalar>
struct FcParams {
  MatX<Scalar> w;  // out x in
  VecX<Scalar> b;  // out
};

/// Two stacked LSTM layers, a ReLU projection, and a linear class head.
template <typename Scalar>
struct NetworkParams {
  LstmParams<Scalar> lstm1;
  LstmParams<Scalar> lstm2;
  FcParams<Scalar> fc;    // hidden_dim -> fc_dim, ReLU
  FcParams<Scalar> head;  // fc_dim -> num_classes, linear

  int input_dim() const { return lstm1.input_dim(); }
  int hidden_dim() const { return lstm1.hidden_dim(); }
  int fc_dim() const { return static_cast<int>(fc.w.rows()); }
  int num_classes() const { return static_cast<int>(head.w.rows()); }
};

/// Gradients share the parameter layout.
template <typename Scalar>
using GradientSet = NetworkParams<Scalar>;

/// Weights drawn from U[-1/sqrt(fan_in), 1/sqrt(fan_in)] in tensor_refs
/// order, column-major within each tensor. Biases start at zero except
/// the LSTM forget-gate blocks, which start at one.
template <typename Scalar>
NetworkParams<Scalar> init_network(int input_dim, int num_classes, Rng& rng,
                                   int hidden_dim = 64, int fc_dim = 64);

template <typename Scalar>
NetworkParams<Scalar> zeros_like(const NetworkParams<Scalar>& shape);

template <typename Scalar>
int64_t param_count(const NetworkParams<Scalar>& p);

/// Flat view over every parameter tensor in canonical serialization order:
/// lstm1.{w_ih,w_hh,b}, lstm2.{w_ih,w_hh,b}, fc.{w,b}, head.{w,b}.
template <typename Scalar>
struct TensorRef {
  std::string name;
  Scalar* data;
  Eigen::Index rows;
  Eigen::Index cols;
  Eigen::Index size() const { return rows * cols; }
};

template <typename Scalar>
std::vector<TensorRef<Scalar>> tensor_refs(NetworkParams<Scalar>& p);
template <typename Scalar>
std::vector<TensorRef<const Scalar>> tensor_refs(const NetworkParams<Scalar>& p);

// ---------------------------------------------------------------------------
// Forward passes
// ---------------------------------------------------------------------------

template <typename Scalar>
struct LstmState {
  VecX<Scalar> h;
  VecX<Scalar> c;
  void reset(int hidden_dim) {
    h = VecX<Scalar>::Zero(hidden_dim);
    c = VecX<Scalar>::Zero(hidden_dim);
  }
};

template <typename Scalar>
struct LstmGates {
  VecX<Scalar> i, f, g, o, tanh_c;
};

/// Advances one LSTM layer by a single frame. The identical code path is
/// used by batch inference, streaming, and the traced training forward,
/// so their outputs agree bit for bit.
template <typename Scalar>
void lstm_cell_step(const LstmParams<Scalar>& p,
                    const Eigen::Ref<const VecX<Scalar>>& x,
                    LstmState<Scalar>& s, LstmGates<Scalar>* gates = nullptr);

template <typename Scalar>
struct NetworkState {
  LstmState<Scalar> l1;
  LstmState<Scalar> l2;
  void reset(int hidden_dim) {
    l1.reset(hidden_dim);
    l2.reset(hidden_dim);
  }
};

/// One frame through the whole network; returns the logits.
template <typename Scalar>
VecX<Scalar> network_step(const NetworkParams<Scalar>& p,
                          NetworkState<Scalar>& state,
                          const Eigen::Ref<const VecX<Scalar>>& x);

/// Logits for a whole sequence from zero initial state.
/// inputs: input_dim x T, result: num_classes x T.
template <typename Scalar>
MatX<Scalar> forward_sequence(const NetworkParams<Scalar>& p,
                              const MatX<Scalar>& inputs);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

/// Intermediate activations recorded during the training forward pass.
/// All time-indexed tensors are column-per-frame.
template <typename Scalar>
struct ForwardTrace {
  MatX<Scalar> x;                           // input_dim x T
  MatX<Scalar> i1, f1, g1, o1, c1, tc1, h1; // H x T
  MatX<Scalar> i2, f2, g2, o2, c2, tc2, h2; // H x T
  MatX<Scalar> a;                           // fc_dim x T (pre-ReLU)
  MatX<Scalar> r;                           // fc_dim x T
  MatX<Scalar> logits;                      // num_classes x T
};

template <typename Scalar>
ForwardTrace<Scalar> forward_traced(const NetworkParams<Scalar>& p,
                                    const MatX<Scalar>& inputs);

/// Backpropagation through time. dlogits is dLoss/dlogits, one column per
/// frame. Gradients are accumulated into `grads` (not zeroed first).
template <typename Scalar>
void backward_sequence(const NetworkParams<Scalar>& p,
                       const ForwardTrace<Scalar>& trace,
                       const MatX<Scalar>& dlogits,
                       GradientSet<Scalar>& grads);

template <typename Scalar>
void add_scaled(GradientSet<Scalar>& dst, const GradientSet<Scalar>& src,
                Scalar scale);

template <typename Scalar>
void scale_gradients(GradientSet<Scalar>& g, Scalar scale);

template <typename Scalar>
double global_grad_norm(const GradientSet<Scalar>& g);

/// Scales all gradients so the global L2 norm is at most max_norm.
/// Returns the norm before clipping.
template <typename Scalar>
double clip_global_norm(GradientSet<Scalar>& g, double max_norm);

struct AdamConfig {
  double lr = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename Scalar>
struct AdamState {
  int64_t step = 0;
  std::vector<VecX<Scalar>> m;  // parallel to tensor_refs order
  std::vector<VecX<Scalar>> v;
};

template <typename Scalar>
void adam_update(NetworkParams<Scalar>& params, const GradientSet<Scalar>& grads,
                 AdamState<Scalar>& state, const AdamConfig& cfg);

template <typename Scalar>
VecX<Scalar> softmax(const Eigen::Ref<const VecX<Scalar>>& logits);

extern template struct LstmParams<float>;
extern template struct LstmParams<double>;
extern template struct NetworkParams<float>;
extern template struct NetworkParams<double>;

}  // namespace pvad
