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

#include <cmath>

namespace pvad {

namespace {

template <typename Scalar>
LstmParams<Scalar> init_lstm(int input_dim, int hidden_dim, Rng& rng) {
  LstmParams<Scalar> p;
  const int rows = 4 * hidden_dim;
  p.w_ih.resize(rows, input_dim);
  p.w_hh.resize(rows, hidden_dim);
  p.b = VecX<Scalar>::Zero(rows);
  const double k_ih = 1.0 / std::sqrt(static_cast<double>(input_dim));
  for (Eigen::Index j = 0; j < p.w_ih.cols(); ++j) {
    for (Eigen::Index i = 0; i < p.w_ih.rows(); ++i) {
      p.w_ih(i, j) = static_cast<Scalar>(rng.uniform(-k_ih, k_ih));
    }
  }
  const double k_hh = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  for (Eigen::Index j = 0; j < p.w_hh.cols(); ++j) {
    for (Eigen::Index i = 0; i < p.w_hh.rows(); ++i) {
      p.w_hh(i, j) = static_cast<Scalar>(rng.uniform(-k_hh, k_hh));
    }
  }
  // Forget gate bias starts at one so early training does not flush state.
  p.b.segment(hidden_dim, hidden_dim).setConstant(Scalar{1});
  return p;
}

template <typename Scalar>
FcParams<Scalar> init_fc(int input_dim, int output_dim, Rng& rng) {
  FcParams<Scalar> p;
  p.w.resize(output_dim, input_dim);
  p.b = VecX<Scalar>::Zero(output_dim);
  const double k = 1.0 / std::sqrt(static_cast<double>(input_dim));
  for (Eigen::Index j = 0; j < p.w.cols(); ++j) {
    for (Eigen::Index i = 0; i < p.w.rows(); ++i) {
      p.w(i, j) = static_cast<Scalar>(rng.uniform(-k, k));
    }
  }
  return p;
}

template <typename Scalar>
VecX<Scalar> sigmoid(const VecX<Scalar>& x) {
  return (Scalar{1} / (Scalar{1} + (-x.array()).exp())).matrix();
}

}  // namespace

template <typename Scalar>
NetworkParams<Scalar> init_network(int input_dim, int num_classes, Rng& rng,
                                   int hidden_dim, int fc_dim) {
  if (input_dim <= 0 || num_classes <= 0 || hidden_dim <= 0 || fc_dim <= 0) {
    throw ConfigError("init_network: all dimensions must be positive");
  }
  NetworkParams<Scalar> p;
  p.lstm1 = init_lstm<Scalar>(input_dim, hidden_dim, rng);
  p.lstm2 = init_lstm<Scalar>(hidden_dim, hidden_dim, rng);
  p.fc = init_fc<Scalar>(hidden_dim, fc_dim, rng);
  p.head = init_fc<Scalar>(fc_dim, num_classes, rng);
  return p;
}

template <typename Scalar>
NetworkParams<Scalar> zeros_like(const NetworkParams<Scalar>& shape) {
  NetworkParams<Scalar> z;
  auto zero_lstm = [](const LstmParams<Scalar>& s) {
    LstmParams<Scalar> out;
    out.w_ih = MatX<Scalar>::Zero(s.w_ih.rows(), s.w_ih.cols());
    out.w_hh = MatX<Scalar>::Zero(s.w_hh.rows(), s.w_hh.cols());
    out.b = VecX<Scalar>::Zero(s.b.size());
    return out;
  };
  auto zero_fc = [](const FcParams<Scalar>& s) {
    FcParams<Scalar> out;
    out.w = MatX<Scalar>::Zero(s.w.rows(), s.w.cols());
    out.b = VecX<Scalar>::Zero(s.b.size());
    return out;
  };
  z.lstm1 = zero_lstm(shape.lstm1);
  z.lstm2 = zero_lstm(shape.lstm2);
  z.fc = zero_fc(shape.fc);
  z.head = zero_fc(shape.head);
  return z;
}

template <typename Scalar>
int64_t param_count(const NetworkParams<Scalar>& p) {
  int64_t n = 0;
  for (const auto& t : tensor_refs(p)) n += t.size();
  return n;
}

template <typename Scalar>
std::vector<TensorRef<Scalar>> tensor_refs(NetworkParams<Scalar>& p) {
  return {
      {"lstm1.w_ih", p.lstm1.w_ih.data(), p.lstm1.w_ih.rows(), p.lstm1.w_ih.cols()},
      {"lstm1.w_hh", p.lstm1.w_hh.data(), p.lstm1.w_hh.rows(), p.lstm1.w_hh.cols()},
      {"lstm1.b", p.lstm1.b.data(), p.lstm1.b.size(), 1},
      {"lstm2.w_ih", p.lstm2.w_ih.data(), p.lstm2.w_ih.rows(), p.lstm2.w_ih.cols()},
      {"lstm2.w_hh", p.lstm2.w_hh.data(), p.lstm2.w_hh.rows(), p.lstm2.w_hh.cols()},
      {"lstm2.b", p.lstm2.b.data(), p.lstm2.b.size(), 1},
      {"fc.w", p.fc.w.data(), p.fc.w.rows(), p.fc.w.cols()},
      {"fc.b", p.fc.b.data(), p.fc.b.size(), 1},
      {"head.w", p.head.w.data(), p.head.w.rows(), p.head.w.cols()},
      {"head.b", p.head.b.data(), p.head.b.size(), 1},
  };
}

template <typename Scalar>
std::vector<TensorRef<const Scalar>> tensor_refs(const NetworkParams<Scalar>& p) {
  std::vector<TensorRef<const Scalar>> out;
  for (const auto& t : tensor_refs(const_cast<NetworkParams<Scalar>&>(p))) {
    out.push_back({t.name, t.data, t.rows, t.cols});
  }
  return out;
}

template <typename Scalar>
void lstm_cell_step(const LstmParams<Scalar>& p,
                    const Eigen::Ref<const VecX<Scalar>>& x,
                    LstmState<Scalar>& s, LstmGates<Scalar>* gates) {
  const int h = p.hidden_dim();
  if (x.size() != p.w_ih.cols()) {
    throw ShapeError("lstm_cell_step: input dim " + std::to_string(x.size()) +
                     " != expected " + std::to_string(p.w_ih.cols()));
  }
  VecX<Scalar> pre = p.b;
  pre.noalias() += p.w_ih * x;
  pre.noalias() += p.w_hh * s.h;

  const VecX<Scalar> i = sigmoid<Scalar>(pre.segment(0, h));
  const VecX<Scalar> f = sigmoid<Scalar>(pre.segment(h, h));
  const VecX<Scalar> g = pre.segment(2 * h, h).array().tanh().matrix();
  const VecX<Scalar> o = sigmoid<Scalar>(pre.segment(3 * h, h));

  s.c = (f.array() * s.c.array() + i.array() * g.array()).matrix();
  const VecX<Scalar> tc = s.c.array().tanh().matrix();
  s.h = (o.array() * tc.array()).matrix();

  if (gates != nullptr) {
    gates->i = i;
    gates->f = f;
    gates->g = g;
    gates->o = o;
    gates->tanh_c = tc;
  }
}

template <typename Scalar>
VecX<Scalar> network_step(const NetworkParams<Scalar>& p,
                          NetworkState<Scalar>& state,
                          const Eigen::Ref<const VecX<Scalar>>& x) {
  lstm_cell_step(p.lstm1, x, state.l1);
  lstm_cell_step(p.lstm2, Eigen::Ref<const VecX<Scalar>>(state.l1.h), state.l2);
  VecX<Scalar> a = p.fc.b;
  a.noalias() += p.fc.w * state.l2.h;
  const VecX<Scalar> r = a.cwiseMax(Scalar{0});
  VecX<Scalar> z = p.head.b;
  z.noalias() += p.head.w * r;
  return z;
}

template <typename Scalar>
MatX<Scalar> forward_sequence(const NetworkParams<Scalar>& p,
                              const MatX<Scalar>& inputs) {
  if (inputs.cols() == 0) return MatX<Scalar>(p.num_classes(), 0);
  if (inputs.rows() != p.input_dim()) {
    throw ShapeError("forward_sequence: input dim " +
                     std::to_string(inputs.rows()) + " != expected " +
                     std::to_string(p.input_dim()));
  }
  NetworkState<Scalar> state;
  state.reset(p.hidden_dim());
  MatX<Scalar> logits(p.num_classes(), inputs.cols());
  for (Eigen::Index t = 0; t < inputs.cols(); ++t) {
    logits.col(t) = network_step<Scalar>(p, state, inputs.col(t));
  }
  return logits;
}

template <typename Scalar>
ForwardTrace<Scalar> forward_traced(const NetworkParams<Scalar>& p,
                                    const MatX<Scalar>& inputs) {
  if (inputs.rows() != p.input_dim()) {
    throw ShapeError("forward_traced: input dim " +
                     std::to_string(inputs.rows()) + " != expected " +
                     std::to_string(p.input_dim()));
  }
  const int h = p.hidden_dim();
  const Eigen::Index T = inputs.cols();
  ForwardTrace<Scalar> tr;
  tr.x = inputs;
  for (auto* m : {&tr.i1, &tr.f1, &tr.g1, &tr.o1, &tr.c1, &tr.tc1, &tr.h1,
                  &tr.i2, &tr.f2, &tr.g2, &tr.o2, &tr.c2, &tr.tc2, &tr.h2}) {
    m->resize(h, T);
  }
  tr.a.resize(p.fc_dim(), T);
  tr.r.resize(p.fc_dim(), T);
  tr.logits.resize(p.num_classes(), T);

  NetworkState<Scalar> state;
  state.reset(h);
  LstmGates<Scalar> g1, g2;
  for (Eigen::Index t = 0; t < T; ++t) {
    lstm_cell_step<Scalar>(p.lstm1, inputs.col(t), state.l1, &g1);
    lstm_cell_step(p.lstm2, Eigen::Ref<const VecX<Scalar>>(state.l1.h),
                   state.l2, &g2);
    tr.i1.col(t) = g1.i;
    tr.f1.col(t) = g1.f;
    tr.g1.col(t) = g1.g;
    tr.o1.col(t) = g1.o;
    tr.c1.col(t) = state.l1.c;
    tr.tc1.col(t) = g1.tanh_c;
    tr.h1.col(t) = state.l1.h;
    tr.i2.col(t) = g2.i;
    tr.f2.col(t) = g2.f;
    tr.g2.col(t) = g2.g;
    tr.o2.col(t) = g2.o;
    tr.c2.col(t) = state.l2.c;
    tr.tc2.col(t) = g2.tanh_c;
    tr.h2.col(t) = state.l2.h;

    VecX<Scalar> a = p.fc.b;
    a.noalias() += p.fc.w * state.l2.h;
    tr.a.col(t) = a;
    tr.r.col(t) = a.cwiseMax(Scalar{0});
    VecX<Scalar> z = p.head.b;
    z.noalias() += p.head.w * tr.r.col(t);
    tr.logits.col(t) = z;
  }
  return tr;
}

namespace {

// Backward pass state for one LSTM layer at one timestep. Returns the
// gradient wrt the layer input; updates dh/dc carried to timestep t-1.
template <typename Scalar>
VecX<Scalar> lstm_cell_backward(
    const LstmParams<Scalar>& p, const Eigen::Ref<const VecX<Scalar>>& x,
    const Eigen::Ref<const VecX<Scalar>>& h_prev,
    const Eigen::Ref<const VecX<Scalar>>& c_prev,
    const Eigen::Ref<const VecX<Scalar>>& gi,
    const Eigen::Ref<const VecX<Scalar>>& gf,
    const Eigen::Ref<const VecX<Scalar>>& gg,
    const Eigen::Ref<const VecX<Scalar>>& go,
    const Eigen::Ref<const VecX<Scalar>>& tc, const VecX<Scalar>& dh,
    VecX<Scalar>& dc_carry, VecX<Scalar>& dh_carry, LstmParams<Scalar>& grads) {
  const int h = p.hidden_dim();

  const VecX<Scalar> dc =
      (dh.array() * go.array() * (Scalar{1} - tc.array().square()) +
       dc_carry.array())
          .matrix();

  VecX<Scalar> dpre(4 * h);
  // d pre_i = dc * g * i(1-i)
  dpre.segment(0, h) = (dc.array() * gg.array() * gi.array() *
                        (Scalar{1} - gi.array()))
                           .matrix();
  // d pre_f = dc * c_prev * f(1-f)
  dpre.segment(h, h) = (dc.array() * c_prev.array() * gf.array() *
                        (Scalar{1} - gf.array()))
                           .matrix();
  // d pre_g = dc * i * (1-g^2)
  dpre.segment(2 * h, h) =
      (dc.array() * gi.array() * (Scalar{1} - gg.array().square())).matrix();
  // d pre_o = dh * tanh(c) * o(1-o)
  dpre.segment(3 * h, h) =
      (dh.array() * tc.array() * go.array() * (Scalar{1} - go.array()))
          .matrix();

  grads.w_ih.noalias() += dpre * x.transpose();
  grads.w_hh.noalias() += dpre * h_prev.transpose();
  grads.b += dpre;

  dc_carry = (dc.array() * gf.array()).matrix();
  dh_carry.noalias() = p.w_hh.transpose() * dpre;
  return p.w_ih.transpose() * dpre;
}

}  // namespace

template <typename Scalar>
void backward_sequence(const NetworkParams<Scalar>& p,
                       const ForwardTrace<Scalar>& trace,
                       const MatX<Scalar>& dlogits,
                       GradientSet<Scalar>& grads) {
  const Eigen::Index T = trace.x.cols();
  if (dlogits.cols() != T || dlogits.rows() != p.num_classes()) {
    throw ShapeError("backward_sequence: dlogits shape mismatch");
  }
  const int h = p.hidden_dim();
  const VecX<Scalar> zero_h = VecX<Scalar>::Zero(h);

  VecX<Scalar> dh1_carry = zero_h, dc1_carry = zero_h;
  VecX<Scalar> dh2_carry = zero_h, dc2_carry = zero_h;

  for (Eigen::Index t = T - 1; t >= 0; --t) {
    const VecX<Scalar> dz = dlogits.col(t);
    grads.head.w.noalias() += dz * trace.r.col(t).transpose();
    grads.head.b += dz;

    VecX<Scalar> dr = p.head.w.transpose() * dz;
    const VecX<Scalar> da =
        (dr.array() * (trace.a.col(t).array() > Scalar{0}).template cast<Scalar>())
            .matrix();
    grads.fc.w.noalias() += da * trace.h2.col(t).transpose();
    grads.fc.b += da;

    VecX<Scalar> dh2 = p.fc.w.transpose() * da + dh2_carry;
    const VecX<Scalar> h1_prev =
        (t > 0) ? VecX<Scalar>(trace.h1.col(t - 1)) : zero_h;
    const VecX<Scalar> c1_prev =
        (t > 0) ? VecX<Scalar>(trace.c1.col(t - 1)) : zero_h;
    const VecX<Scalar> h2_prev =
        (t > 0) ? VecX<Scalar>(trace.h2.col(t - 1)) : zero_h;
    const VecX<Scalar> c2_prev =
        (t > 0) ? VecX<Scalar>(trace.c2.col(t - 1)) : zero_h;

    const VecX<Scalar> dx2 = lstm_cell_backward<Scalar>(
        p.lstm2, trace.h1.col(t), h2_prev, c2_prev, trace.i2.col(t),
        trace.f2.col(t), trace.g2.col(t), trace.o2.col(t), trace.tc2.col(t),
        dh2, dc2_carry, dh2_carry, grads.lstm2);

    const VecX<Scalar> dh1 = dx2 + dh1_carry;
    lstm_cell_backward<Scalar>(p.lstm1, trace.x.col(t), h1_prev, c1_prev,
                               trace.i1.col(t), trace.f1.col(t),
                               trace.g1.col(t), trace.o1.col(t),
                               trace.tc1.col(t), dh1, dc1_carry, dh1_carry,
                               grads.lstm1);
  }
}

template <typename Scalar>
void add_scaled(GradientSet<Scalar>& dst, const GradientSet<Scalar>& src,
                Scalar scale) {
  auto d = tensor_refs(dst);
  auto s = tensor_refs(src);
  for (size_t k = 0; k < d.size(); ++k) {
    if (d[k].size() != s[k].size()) {
      throw ShapeError("add_scaled: tensor " + d[k].name + " shape mismatch");
    }
    Eigen::Map<VecX<Scalar>>(d[k].data, d[k].size()) +=
        scale * Eigen::Map<const VecX<Scalar>>(s[k].data, s[k].size());
  }
}

template <typename Scalar>
void scale_gradients(GradientSet<Scalar>& g, Scalar scale) {
  for (auto& t : tensor_refs(g)) {
    Eigen::Map<VecX<Scalar>>(t.data, t.size()) *= scale;
  }
}

template <typename Scalar>
double global_grad_norm(const GradientSet<Scalar>& g) {
  double sq = 0.0;
  for (const auto& t : tensor_refs(g)) {
    sq += Eigen::Map<const VecX<Scalar>>(t.data, t.size())
              .template cast<double>()
              .squaredNorm();
  }
  return std::sqrt(sq);
}

template <typename Scalar>
double clip_global_norm(GradientSet<Scalar>& g, double max_norm) {
  const double norm = global_grad_norm(g);
  if (norm > max_norm && norm > 0.0) {
    scale_gradients(g, static_cast<Scalar>(max_norm / norm));
  }
  return norm;
}

template <typename Scalar>
void adam_update(NetworkParams<Scalar>& params, const GradientSet<Scalar>& grads,
                 AdamState<Scalar>& state, const AdamConfig& cfg) {
  auto p = tensor_refs(params);
  auto g = tensor_refs(grads);
  if (state.m.empty()) {
    state.m.resize(p.size());
    state.v.resize(p.size());
    for (size_t k = 0; k < p.size(); ++k) {
      state.m[k] = VecX<Scalar>::Zero(p[k].size());
      state.v[k] = VecX<Scalar>::Zero(p[k].size());
    }
  }
  if (state.m.size() != p.size()) {
    throw ShapeError("adam_update: optimizer state does not match network");
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  const Scalar b1 = static_cast<Scalar>(cfg.beta1);
  const Scalar b2 = static_cast<Scalar>(cfg.beta2);
  const Scalar lr = static_cast<Scalar>(cfg.lr / bc1);
  const Scalar inv_sqrt_bc2 = static_cast<Scalar>(1.0 / std::sqrt(bc2));
  const Scalar eps = static_cast<Scalar>(cfg.eps);

  for (size_t k = 0; k < p.size(); ++k) {
    if (state.m[k].size() != p[k].size()) {
      throw ShapeError("adam_update: state tensor " + p[k].name +
                       " shape mismatch");
    }
    Eigen::Map<VecX<Scalar>> pk(p[k].data, p[k].size());
    Eigen::Map<const VecX<Scalar>> gk(g[k].data, g[k].size());
    auto& m = state.m[k];
    auto& v = state.v[k];
    m = b1 * m + (Scalar{1} - b1) * gk;
    v = (b2 * v.array() + (Scalar{1} - b2) * gk.array().square()).matrix();
    pk.array() -=
        lr * m.array() / (v.array().sqrt() * inv_sqrt_bc2 + eps);
  }
}

template <typename Scalar>
VecX<Scalar> softmax(const Eigen::Ref<const VecX<Scalar>>& logits) {
  const Scalar mx = logits.maxCoeff();
  VecX<Scalar> e = (logits.array() - mx).exp().matrix();
  return e / e.sum();
}

/// Explicit instantiations: float for production, double for gradient
// checks against finite differences.
#define PVAD_INSTANTIATE_NN(S)                                                 \
  template NetworkParams<S> init_network<S>(int, int, Rng&, int, int);         \
  template NetworkParams<S> zeros_like<S>(const NetworkParams<S>&);            \
  template int64_t param_count<S>(const NetworkParams<S>&);                    \
  template std::vector<TensorRef<S>> tensor_refs<S>(NetworkParams<S>&);        \
  template std::vector<TensorRef<const S>> tensor_refs<S>(                     \
      const NetworkParams<S>&);                                                \
  template void lstm_cell_step<S>(const LstmParams<S>&,                        \
                                  const Eigen::Ref<const VecX<S>>&,            \
                                  LstmState<S>&, LstmGates<S>*);               \
  template VecX<S> network_step<S>(const NetworkParams<S>&, NetworkState<S>&,  \
                                   const Eigen::Ref<const VecX<S>>&);          \
  template MatX<S> forward_sequence<S>(const NetworkParams<S>&,                \
                                       const MatX<S>&);                        \
  template ForwardTrace<S> forward_traced<S>(const NetworkParams<S>&,          \
                                             const MatX<S>&);                  \
  template void backward_sequence<S>(const NetworkParams<S>&,                  \
                                     const ForwardTrace<S>&, const MatX<S>&,   \
                                     GradientSet<S>&);                         \
  template void add_scaled<S>(GradientSet<S>&, const GradientSet<S>&, S);      \
  template void scale_gradients<S>(GradientSet<S>&, S);                        \
  template double global_grad_norm<S>(const GradientSet<S>&);                  \
  template double clip_global_norm<S>(GradientSet<S>&, double);                \
  template void adam_update<S>(NetworkParams<S>&, const GradientSet<S>&,       \
                               AdamState<S>&, const AdamConfig&);              \
  template VecX<S> softmax<S>(const Eigen::Ref<const VecX<S>>&);

PVAD_INSTANTIATE_NN(float)
PVAD_INSTANTIATE_NN(double)

#undef PVAD_INSTANTIATE_NN

template struct LstmParams<float>;
template struct LstmParams<double>;
template struct NetworkParams<float>;
template struct NetworkParams<double>;

}  // namespace pvad
