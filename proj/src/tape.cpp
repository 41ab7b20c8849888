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
#include "camguide/tape.hpp"

#include <cmath>
#include <utility>

#include "camguide/error.hpp"
#include "camguide/kernels.hpp"

namespace camguide {

const Array& Tensor::val() const { return tape->value(*this); }

Tensor Tape::leaf(Array value) { return make(std::move(value), true, nullptr); }

Tensor Tape::constant(Array value) { return make(std::move(value), false, nullptr); }

Tensor Tape::make(Array value, bool requires_grad, BackFn back) {
  check(!grads_ready_, ErrorCode::kInternal, "tape already backpropagated");
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Tensor{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

void Tape::accumulate(std::uint32_t id, const Array& delta) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  check(n.grad.same_shape(delta), ErrorCode::kInternal, "gradient shape mismatch");
  kern::active().add(n.grad.data(), delta.data(), n.grad.data(), n.grad.size());
}

void Tape::accumulate_scaled(std::uint32_t id, double s, const Array& delta) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  check(n.grad.same_shape(delta), ErrorCode::kInternal, "gradient shape mismatch");
  kern::active().axpby(s, delta.data(), 1.0, n.grad.data(), n.grad.size());
}

void Tape::backward(const Tensor& root) {
  check(root.tape == this, ErrorCode::kInternal, "backward: root from another tape");
  check(!grads_ready_, ErrorCode::kInternal, "backward: already ran");
  check(value(root).size() == 1, ErrorCode::kInternal, "backward: root is not scalar");
  for (Node& n : nodes_) {
    if (n.requires_grad) n.grad = Array::zeros_like(n.value);
  }
  grads_ready_ = true;
  Node& r = nodes_[root.id];
  if (!r.requires_grad) return;  // constant root: every gradient stays zero
  r.grad[0] = 1.0;
  for (std::uint32_t id = root.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (n.back && n.requires_grad) n.back(*this);
  }
}

const Array& Tape::value(const Tensor& t) const {
  check(t.tape == this && t.id < nodes_.size(), ErrorCode::kInternal, "bad tensor handle");
  return nodes_[t.id].value;
}

const Array& Tape::grad(const Tensor& t) const {
  check(grads_ready_, ErrorCode::kInternal, "grad: backward() has not run");
  check(t.tape == this && t.id < nodes_.size(), ErrorCode::kInternal, "bad tensor handle");
  check(nodes_[t.id].requires_grad, ErrorCode::kInternal, "grad: node does not track gradients");
  return nodes_[t.id].grad;
}

namespace {

Tape& same_tape(Tensor a, Tensor b) {
  check(a.tape != nullptr && a.tape == b.tape, ErrorCode::kInternal,
        "op on tensors from different tapes");
  return *a.tape;
}

std::uint32_t next_id(const Tape& t) { return static_cast<std::uint32_t>(t.node_count()); }

}  // namespace

Tensor add(Tensor a, Tensor b) {
  Tape& t = same_tape(a, b);
  std::uint32_t ai = a.id, bi = b.id, oid = next_id(t);
  return t.make(add(t.v(ai), t.v(bi)), t.needs(ai) || t.needs(bi), [=](Tape& tp) {
    tp.accumulate(ai, tp.g(oid));
    tp.accumulate(bi, tp.g(oid));
  });
}

Tensor sub(Tensor a, Tensor b) {
  Tape& t = same_tape(a, b);
  std::uint32_t ai = a.id, bi = b.id, oid = next_id(t);
  return t.make(sub(t.v(ai), t.v(bi)), t.needs(ai) || t.needs(bi), [=](Tape& tp) {
    tp.accumulate(ai, tp.g(oid));
    tp.accumulate_scaled(bi, -1.0, tp.g(oid));
  });
}

Tensor mul(Tensor a, Tensor b) {
  Tape& t = same_tape(a, b);
  std::uint32_t ai = a.id, bi = b.id, oid = next_id(t);
  return t.make(mul(t.v(ai), t.v(bi)), t.needs(ai) || t.needs(bi), [=](Tape& tp) {
    tp.accumulate(ai, mul(tp.g(oid), tp.v(bi)));
    tp.accumulate(bi, mul(tp.g(oid), tp.v(ai)));
  });
}

Tensor add_const(Tensor a, const Array& c) {
  Tape& t = *a.tape;
  std::uint32_t ai = a.id, oid = next_id(t);
  return t.make(add(t.v(ai), c), t.needs(ai),
                [=](Tape& tp) { tp.accumulate(ai, tp.g(oid)); });
}

Tensor sub_const(Tensor a, const Array& c) {
  Tape& t = *a.tape;
  std::uint32_t ai = a.id, oid = next_id(t);
  return t.make(sub(t.v(ai), c), t.needs(ai),
                [=](Tape& tp) { tp.accumulate(ai, tp.g(oid)); });
}

Tensor mul_const(Tensor a, const Array& c) {
  Tape& t = *a.tape;
  std::uint32_t ai = a.id, oid = next_id(t);
  Array cc = c;
  return t.make(mul(t.v(ai), c), t.needs(ai),
                [=, cc = std::move(cc)](Tape& tp) { tp.accumulate(ai, mul(tp.g(oid), cc)); });
}

Tensor add_scalar(Tensor a, double c) {
  Tape& t = *a.tape;
  std::uint32_t ai = a.id, oid = next_id(t);
  Array out = t.v(ai);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += c;
  return t.make(std::move(out), t.needs(ai),
                [=](Tape& tp) { tp.accumulate(ai, tp.g(oid)); });
}

Tensor mul_scalar(Tensor a, double c) {
  Tape& t = *a.tape;
  std::uint32_t ai = a.id, oid = next_id(t);
  return t.make(scale(t.v(ai), c), t.needs(ai),
                [=](Tape& tp) { tp.accumulate_scaled(ai, c, tp.g(oid)); });
}

Tensor matmul(Tensor a, Tensor b) {
  Tape& t = same_tape(a, b);
  std::uint32_t ai = a.id, bi = b.id, oid = next_id(t);
  return t.make(matmul(t.v(ai), t.v(bi)), t.needs(ai) || t.needs(bi), [=](Tape& tp) {
    tp.accumulate(ai, matmul_nt(tp.g(oid), tp.v(bi)));
    tp.accumulate(bi, matmul_tn(tp.v(ai), tp.g(oid)));
  });
}

Tensor matmul(const Array& a, Tensor b) {
  Tape& t = *b.tape;
  std::uint32_t bi = b.id, oid = next_id(t);
  Array ac = a;
  return t.make(matmul(a, t.v(bi)), t.needs(bi), [=, ac = std::move(ac)](Tape& tp) {
    tp.accumulate(bi, matmul_tn(ac, tp.g(oid)));
  });
}

Tensor matmul(Tensor a, const Array& b) {
  Tape& t = *a.tape;
  std::uint32_t ai = a.id, oid = next_id(t);
  Array bc = b;
  return t.make(matmul(t.v(ai), b), t.needs(ai), [=, bc = std::move(bc)](Tape& tp) {
    tp.accumulate(ai, matmul_nt(tp.g(oid), bc));
  });
}

Tensor matmul_nt(Tensor a, const Array& b) {
  Tape& t = *a.tape;
  std::uint32_t ai = a.id, oid = next_id(t);
  Array bc = b;
  return t.make(matmul_nt(t.v(ai), b), t.needs(ai), [=, bc = std::move(bc)](Tape& tp) {
    tp.accumulate(ai, matmul(tp.g(oid), bc));
  });
}

Tensor tanh(Tensor a) {
  Tape& t = *a.tape;
  std::uint32_t ai = a.id, oid = next_id(t);
  return t.make(map_tanh(t.v(ai)), t.needs(ai), [=](Tape& tp) {
    const Array& y = tp.v(oid);
    const Array& go = tp.g(oid);
    Array dx = Array::zeros_like(y);
    for (std::size_t i = 0; i < y.size(); ++i) dx[i] = go[i] * (1.0 - y[i] * y[i]);
    tp.accumulate(ai, dx);
  });
}

Tensor add_rowvec(Tensor m, Tensor v) {
  Tape& t = same_tape(m, v);
  std::uint32_t mi = m.id, vi = v.id, oid = next_id(t);
  return t.make(add_rowvec(t.v(mi), t.v(vi)), t.needs(mi) || t.needs(vi), [=](Tape& tp) {
    const Array& go = tp.g(oid);
    tp.accumulate(mi, go);
    Array colsum({go.cols()});
    for (std::size_t r = 0; r < go.rows(); ++r) {
      kern::active().add(colsum.data(), go.data() + r * go.cols(), colsum.data(), go.cols());
    }
    tp.accumulate(vi, colsum);
  });
}

Tensor sum(Tensor a) {
  Tape& t = *a.tape;
  std::uint32_t ai = a.id, oid = next_id(t);
  return t.make(Array::scalar(sum(t.v(ai))), t.needs(ai), [=](Tape& tp) {
    double g = tp.g(oid)[0];
    Array dx = Array::zeros_like(tp.v(ai));
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = g;
    tp.accumulate(ai, dx);
  });
}

Tensor mean(Tensor a) {
  Tape& t = *a.tape;
  std::uint32_t ai = a.id, oid = next_id(t);
  double inv = 1.0 / static_cast<double>(t.v(ai).size());
  return t.make(Array::scalar(sum(t.v(ai)) * inv), t.needs(ai), [=](Tape& tp) {
    double g = tp.g(oid)[0] * inv;
    Array dx = Array::zeros_like(tp.v(ai));
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = g;
    tp.accumulate(ai, dx);
  });
}

Tensor dot_const(Tensor a, const Array& w) {
  Tape& t = *a.tape;
  std::uint32_t ai = a.id, oid = next_id(t);
  Array wc = w;
  return t.make(Array::scalar(dot(t.v(ai), w)), t.needs(ai), [=, wc = std::move(wc)](Tape& tp) {
    tp.accumulate(ai, scale(wc, tp.g(oid)[0]));
  });
}

Tensor gather_rows(Tensor a, std::vector<int> idx) {
  Tape& t = *a.tape;
  std::uint32_t ai = a.id, oid = next_id(t);
  Array out = gather_rows(t.v(ai), idx);  // value first: the capture moves idx
  return t.make(std::move(out), t.needs(ai), [=, idx = std::move(idx)](Tape& tp) {
    const Array& go = tp.g(oid);
    Array dx = Array::zeros_like(tp.v(ai));
    std::size_t c = dx.cols();
    for (std::size_t r = 0; r < idx.size(); ++r) {
      double* dst = dx.data() + static_cast<std::size_t>(idx[r]) * c;
      kern::active().add(dst, go.data() + r * c, dst, c);
    }
    tp.accumulate(ai, dx);
  });
}

Tensor gather_cols(Tensor a, std::vector<int> idx) {
  Tape& t = *a.tape;
  const Array& av = t.v(a.id);
  check(av.rank() == 2, ErrorCode::kInternal, "gather_cols: rank-2 expected");
  Array out({av.rows(), idx.size()});
  for (std::size_t r = 0; r < av.rows(); ++r) {
    for (std::size_t i = 0; i < idx.size(); ++i) {
      check(idx[i] >= 0 && static_cast<std::size_t>(idx[i]) < av.cols(), ErrorCode::kInternal,
            "gather_cols: index out of range");
      out.at2(r, i) = av.at2(r, static_cast<std::size_t>(idx[i]));
    }
  }
  std::uint32_t ai = a.id, oid = next_id(t);
  return t.make(std::move(out), t.needs(ai), [=, idx = std::move(idx)](Tape& tp) {
    const Array& go = tp.g(oid);
    Array dx = Array::zeros_like(tp.v(ai));
    for (std::size_t r = 0; r < go.rows(); ++r) {
      for (std::size_t i = 0; i < idx.size(); ++i) {
        dx.at2(r, static_cast<std::size_t>(idx[i])) += go.at2(r, i);
      }
    }
    tp.accumulate(ai, dx);
  });
}

Tensor gather_elems(Tensor a, std::vector<int> idx) {
  Tape& t = *a.tape;
  const Array& av = t.v(a.id);
  check(av.rank() == 1, ErrorCode::kInternal, "gather_elems: rank-1 expected");
  Array out({idx.size()});
  for (std::size_t i = 0; i < idx.size(); ++i) {
    check(idx[i] >= 0 && static_cast<std::size_t>(idx[i]) < av.size(), ErrorCode::kInternal,
          "gather_elems: index out of range");
    out[i] = av[static_cast<std::size_t>(idx[i])];
  }
  std::uint32_t ai = a.id, oid = next_id(t);
  return t.make(std::move(out), t.needs(ai), [=, idx = std::move(idx)](Tape& tp) {
    const Array& go = tp.g(oid);
    Array dx = Array::zeros_like(tp.v(ai));
    for (std::size_t i = 0; i < idx.size(); ++i) dx[static_cast<std::size_t>(idx[i])] += go[i];
    tp.accumulate(ai, dx);
  });
}

Tensor pick_per_row(Tensor a, std::vector<int> col) {
  Tape& t = *a.tape;
  const Array& av = t.v(a.id);
  check(av.rank() == 2 && av.rows() == col.size(), ErrorCode::kInternal,
        "pick_per_row: need one column index per row");
  Array out({av.rows()});
  for (std::size_t r = 0; r < av.rows(); ++r) {
    check(col[r] >= 0 && static_cast<std::size_t>(col[r]) < av.cols(), ErrorCode::kInternal,
          "pick_per_row: column out of range");
    out[r] = av.at2(r, static_cast<std::size_t>(col[r]));
  }
  std::uint32_t ai = a.id, oid = next_id(t);
  return t.make(std::move(out), t.needs(ai), [=, col = std::move(col)](Tape& tp) {
    const Array& go = tp.g(oid);
    Array dx = Array::zeros_like(tp.v(ai));
    for (std::size_t r = 0; r < col.size(); ++r) {
      dx.at2(r, static_cast<std::size_t>(col[r])) += go[r];
    }
    tp.accumulate(ai, dx);
  });
}

Tensor softmax_rows(Tensor a) {
  Tape& t = *a.tape;
  std::uint32_t ai = a.id, oid = next_id(t);
  return t.make(softmax_rows(t.v(ai)), t.needs(ai), [=](Tape& tp) {
    const Array& y = tp.v(oid);
    const Array& go = tp.g(oid);
    Array dx = Array::zeros_like(y);
    std::size_t c = y.cols();
    for (std::size_t r = 0; r < y.rows(); ++r) {
      const double* yr = y.data() + r * c;
      const double* gr = go.data() + r * c;
      double s = kern::active().dot(gr, yr, c);
      for (std::size_t j = 0; j < c; ++j) dx.at2(r, j) = (gr[j] - s) * yr[j];
    }
    tp.accumulate(ai, dx);
  });
}

Tensor log_softmax_rows(Tensor a) {
  Tape& t = *a.tape;
  std::uint32_t ai = a.id, oid = next_id(t);
  return t.make(log_softmax_rows(t.v(ai)), t.needs(ai), [=](Tape& tp) {
    const Array& y = tp.v(oid);  // log-probabilities
    const Array& go = tp.g(oid);
    Array dx = Array::zeros_like(y);
    std::size_t c = y.cols();
    for (std::size_t r = 0; r < y.rows(); ++r) {
      const double* yr = y.data() + r * c;
      const double* gr = go.data() + r * c;
      double s = kern::active().sum(gr, c);
      for (std::size_t j = 0; j < c; ++j) dx.at2(r, j) = gr[j] - std::exp(yr[j]) * s;
    }
    tp.accumulate(ai, dx);
  });
}

Tensor logsumexp_rows(Tensor a) {
  Tape& t = *a.tape;
  const Array& av = t.v(a.id);
  check(av.rank() == 2, ErrorCode::kInternal, "logsumexp_rows: rank-2 expected");
  std::uint32_t ai = a.id, oid = next_id(t);
  return t.make(logsumexp(av, 1), t.needs(ai), [=](Tape& tp) {
    const Array& x = tp.v(ai);
    const Array& y = tp.v(oid);
    const Array& go = tp.g(oid);
    Array dx = Array::zeros_like(x);
    std::size_t c = x.cols();
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t j = 0; j < c; ++j) {
        dx.at2(r, j) = go[r] * std::exp(x.at2(r, j) - y[r]);
      }
    }
    tp.accumulate(ai, dx);
  });
}

Tensor l2_normalize_rows(Tensor a, double eps) {
  Tape& t = *a.tape;
  std::uint32_t ai = a.id, oid = next_id(t);
  return t.make(l2_normalize_rows(t.v(ai), eps), t.needs(ai), [=](Tape& tp) {
    const Array& x = tp.v(ai);
    const Array& y = tp.v(oid);
    const Array& go = tp.g(oid);
    Array dx = Array::zeros_like(x);
    std::size_t c = x.cols();
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const double* xr = x.data() + r * c;
      const double* yr = y.data() + r * c;
      const double* gr = go.data() + r * c;
      double n = std::sqrt(kern::active().dot(xr, xr, c) + eps);
      double gy = kern::active().dot(gr, yr, c);
      for (std::size_t j = 0; j < c; ++j) dx.at2(r, j) = (gr[j] - yr[j] * gy) / n;
    }
    tp.accumulate(ai, dx);
  });
}

}  // namespace camguide
