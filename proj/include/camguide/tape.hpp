/* Copyright 2026 The CamGuide Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef CAMGUIDE_TAPE_HPP_
#define CAMGUIDE_TAPE_HPP_

#include <cstdint>
#include <functional>
#include <vector>

#include "camguide/array.hpp"

namespace camguide {

class Tape;

// Lightweight handle to a node on a Tape. Valid as long as the Tape lives.
struct Tensor {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  const Array& val() const;
  const std::vector<std::size_t>& shape() const { return val().shape(); }
};

// Records primitive operations for reverse-mode differentiation. Replaying
// the records backward from a scalar root yields one gradient per node,
// shaped like the node's value. Single-threaded by contract; independent
// Tapes may live on different threads.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // A differentiable input node (weights, biases).
  Tensor leaf(Array value);
  // A node whose gradient is never requested (e.g. frozen features).
  Tensor constant(Array value);

  // Backpropagates from a scalar root. May be called once per tape.
  void backward(const Tensor& root);

  const Array& value(const Tensor& t) const;
  // Gradient of the backward() root w.r.t. t. Valid after backward().
  const Array& grad(const Tensor& t) const;

  std::size_t node_count() const { return nodes_.size(); }

  // --- internals used by the op implementations ---
  using BackFn = std::function<void(Tape&)>;
  Tensor make(Array value, bool requires_grad, BackFn back);
  const Array& v(std::uint32_t id) const { return nodes_[id].value; }
  const Array& g(std::uint32_t id) const { return nodes_[id].grad; }
  bool needs(std::uint32_t id) const { return nodes_[id].requires_grad; }
  // grad[id] += delta
  void accumulate(std::uint32_t id, const Array& delta);
  // grad[id] += s * delta
  void accumulate_scaled(std::uint32_t id, double s, const Array& delta);

 private:
  struct Node {
    Array value;
    Array grad;
    bool requires_grad = false;
    BackFn back;
  };
  std::vector<Node> nodes_;
  bool grads_ready_ = false;
};

// --- differentiable ops ---

Tensor add(Tensor a, Tensor b);
Tensor sub(Tensor a, Tensor b);
Tensor mul(Tensor a, Tensor b);
Tensor add_const(Tensor a, const Array& c);
Tensor sub_const(Tensor a, const Array& c);
Tensor mul_const(Tensor a, const Array& c);
Tensor add_scalar(Tensor a, double c);
Tensor mul_scalar(Tensor a, double c);

Tensor matmul(Tensor a, Tensor b);
Tensor matmul(const Array& a, Tensor b);  // constant left operand
Tensor matmul(Tensor a, const Array& b);  // constant right operand
// a (m x k) times b^T (n x k) with b constant; used for similarity matrices
// against frozen guide features.
Tensor matmul_nt(Tensor a, const Array& b);

Tensor tanh(Tensor a);
Tensor add_rowvec(Tensor m, Tensor v);

Tensor sum(Tensor a);
Tensor mean(Tensor a);
// Scalar dot with a constant weight vector.
Tensor dot_const(Tensor a, const Array& w);

Tensor gather_rows(Tensor a, std::vector<int> idx);
Tensor gather_cols(Tensor a, std::vector<int> idx);
Tensor gather_elems(Tensor a, std::vector<int> idx);
// out[r] = a[r, col[r]]
Tensor pick_per_row(Tensor a, std::vector<int> col);

Tensor softmax_rows(Tensor a);
Tensor log_softmax_rows(Tensor a);
// Row-wise logsumexp of a rank-2 input; output is rank 1.
Tensor logsumexp_rows(Tensor a);
Tensor l2_normalize_rows(Tensor a, double eps = 1e-24);

}  // namespace camguide

#endif  // CAMGUIDE_TAPE_HPP_
