// Copyright 2026 The templner Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Dense building blocks for the built-in encoder-decoder: a GRU cell,
// scaled dot-product attention and a log-softmax head, each with its
// hand-written backward pass. All kernels are templated on the scalar type
// and operate on column vectors.

#include <cmath>

#include <Eigen/Dense>

namespace templner::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return (Scalar(1) + (-x.array()).exp()).inverse().matrix();
}

/// Gate weights stacked as rows [update; reset; candidate].
template <typename Scalar>
struct GruWeights {
  Matrix<Scalar> input;      // 3H x I
  Matrix<Scalar> recurrent;  // 3H x H
  Matrix<Scalar> bias;       // 3H x 1

  GruWeights() = default;
  GruWeights(Eigen::Index input_dim, Eigen::Index hidden_dim)
      : input(Matrix<Scalar>::Zero(3 * hidden_dim, input_dim)),
        recurrent(Matrix<Scalar>::Zero(3 * hidden_dim, hidden_dim)),
        bias(Matrix<Scalar>::Zero(3 * hidden_dim, 1)) {}

  Eigen::Index hidden_dim() const { return recurrent.cols(); }
  Eigen::Index input_dim() const { return input.cols(); }
};

/// Activations of one GRU step, kept for the backward pass.
template <typename Scalar>
struct GruStep {
  Vector<Scalar> h_prev, update, reset, candidate, h;
};

//   z = sigmoid(Wz x + Uz h + bz)
//   r = sigmoid(Wr x + Ur h + br)
//   n = tanh(Wn x + Un (r * h) + bn)
//   h' = (1 - z) * n + z * h
template <typename Scalar, typename InputDerived, typename StateDerived>
GruStep<Scalar> gru_forward(const GruWeights<Scalar>& w, const Eigen::MatrixBase<InputDerived>& x,
                            const Eigen::MatrixBase<StateDerived>& h_prev) {
  const Eigen::Index H = w.hidden_dim();
  GruStep<Scalar> step;
  step.h_prev = h_prev;
  Vector<Scalar> pre = w.input * x + w.bias;
  pre.head(2 * H).noalias() += w.recurrent.topRows(2 * H) * h_prev;
  step.update = sigmoid(pre.head(H));
  step.reset = sigmoid(pre.segment(H, H));
  Vector<Scalar> gated = step.reset.cwiseProduct(h_prev);
  step.candidate = (pre.tail(H) + w.recurrent.bottomRows(H) * gated).array().tanh().matrix();
  step.h = (Scalar(1) - step.update.array()) * step.candidate.array() + step.update.array() * h_prev.array();
  return step;
}

/// Accumulates parameter gradients into `grad` and returns dL/dx, dL/dh_prev
/// through the out-parameters.
template <typename Scalar, typename InputDerived>
void gru_backward(const GruWeights<Scalar>& w, const GruStep<Scalar>& step,
                  const Eigen::MatrixBase<InputDerived>& x, const Vector<Scalar>& dh, GruWeights<Scalar>& grad,
                  Vector<Scalar>& dx, Vector<Scalar>& dh_prev) {
  const Eigen::Index H = w.hidden_dim();
  const auto& z = step.update.array();
  const auto& r = step.reset.array();
  const auto& n = step.candidate.array();
  const auto& hp = step.h_prev.array();

  Vector<Scalar> dpre(3 * H);
  Vector<Scalar> dn = dh.array() * (Scalar(1) - z);
  dpre.tail(H) = dn.array() * (Scalar(1) - n.square());
  dpre.head(H) = dh.array() * (hp - n) * z * (Scalar(1) - z);

  Vector<Scalar> gated = r * hp;
  Vector<Scalar> dgated = w.recurrent.bottomRows(H).transpose() * dpre.tail(H);
  dpre.segment(H, H) = dgated.array() * hp * r * (Scalar(1) - r);

  grad.input.noalias() += dpre * x.transpose();
  grad.bias += dpre;
  grad.recurrent.topRows(2 * H).noalias() += dpre.head(2 * H) * step.h_prev.transpose();
  grad.recurrent.bottomRows(H).noalias() += dpre.tail(H) * gated.transpose();

  dx.noalias() = w.input.transpose() * dpre;
  dh_prev = dh.array() * z + dgated.array() * r;
  dh_prev.noalias() += w.recurrent.topRows(2 * H).transpose() * dpre.head(2 * H);
}

template <typename Derived>
auto log_softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  const Scalar top = logits.maxCoeff();
  const Scalar lse = top + std::log((logits.array() - top).exp().sum());
  return (logits.array() - lse).matrix().eval();
}

/// Scaled dot-product attention of one query over the columns of `memory`.
template <typename Scalar>
struct AttentionStep {
  Vector<Scalar> weights;  // softmax over memory positions
  Vector<Scalar> context;  // memory * weights
};

template <typename Scalar, typename QueryDerived>
AttentionStep<Scalar> attention_forward(const Matrix<Scalar>& memory, const Eigen::MatrixBase<QueryDerived>& query) {
  const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(memory.rows()));
  Vector<Scalar> energies = (memory.transpose() * query) * scale;
  AttentionStep<Scalar> out;
  out.weights = log_softmax(energies).array().exp().matrix();
  out.context = memory * out.weights;
  return out;
}

/// Adds the memory gradient into `dmemory` and returns dL/dquery.
template <typename Scalar, typename QueryDerived>
Vector<Scalar> attention_backward(const Matrix<Scalar>& memory, const Eigen::MatrixBase<QueryDerived>& query,
                                  const AttentionStep<Scalar>& step, const Vector<Scalar>& dcontext,
                                  Matrix<Scalar>& dmemory) {
  const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(memory.rows()));
  dmemory.noalias() += dcontext * step.weights.transpose();
  Vector<Scalar> dweights = memory.transpose() * dcontext;
  const Scalar mean = step.weights.dot(dweights);
  Vector<Scalar> denergies = (step.weights.array() * (dweights.array() - mean)).matrix() * scale;
  dmemory.noalias() += query * denergies.transpose();
  return memory * denergies;
}

}  // namespace templner::nn
