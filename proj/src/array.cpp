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
#include "camguide/array.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "camguide/error.hpp"
#include "camguide/kernels.hpp"

namespace camguide {
namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t p = 1;
  for (std::size_t d : shape) {
    check(d > 0, ErrorCode::kInternal, "array dimensions must be positive");
    p *= d;
  }
  return p;
}

void require_same_shape(const Array& a, const Array& b, const char* op) {
  check(a.same_shape(b), ErrorCode::kInternal,
        std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

}  // namespace

Array::Array(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {
  cols_cached_ = shape_.empty() ? 0 : shape_.back();
}

Array::Array(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check(shape_product(shape_) == data_.size(), ErrorCode::kInternal,
        "array data length does not match shape");
  cols_cached_ = shape_.empty() ? 0 : shape_.back();
}

Array Array::scalar(double v) {
  Array a;
  a.data_[0] = v;
  return a;
}

std::size_t Array::rows() const {
  check(rank() == 2, ErrorCode::kInternal, "rows(): array is not rank 2");
  return shape_[0];
}

std::size_t Array::cols() const {
  check(rank() == 2, ErrorCode::kInternal, "cols(): array is not rank 2");
  return shape_[1];
}

bool Array::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Array::shape_str() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) os << (i ? "," : "") << shape_[i];
  os << "]";
  return os.str();
}

Array add(const Array& a, const Array& b) {
  require_same_shape(a, b, "add");
  Array out = Array::zeros_like(a);
  kern::active().add(a.data(), b.data(), out.data(), a.size());
  return out;
}

Array sub(const Array& a, const Array& b) {
  require_same_shape(a, b, "sub");
  Array out = Array::zeros_like(a);
  kern::active().sub(a.data(), b.data(), out.data(), a.size());
  return out;
}

Array mul(const Array& a, const Array& b) {
  require_same_shape(a, b, "mul");
  Array out = Array::zeros_like(a);
  kern::active().mul(a.data(), b.data(), out.data(), a.size());
  return out;
}

Array scale(const Array& a, double s) {
  Array out = Array::zeros_like(a);
  kern::active().scale(a.data(), s, out.data(), a.size());
  return out;
}

void axpby_inplace(double a, const Array& x, double b, Array& y) {
  require_same_shape(x, y, "axpby");
  kern::active().axpby(a, x.data(), b, y.data(), y.size());
}

double dot(const Array& a, const Array& b) {
  require_same_shape(a, b, "dot");
  return kern::active().dot(a.data(), b.data(), a.size());
}

double sum(const Array& a) { return kern::active().sum(a.data(), a.size()); }

Array matmul(const Array& a, const Array& b) {
  check(a.rank() == 2 && b.rank() == 2 && a.cols() == b.rows(), ErrorCode::kInternal,
        "matmul: incompatible shapes " + a.shape_str() + " x " + b.shape_str());
  Array c({a.rows(), b.cols()});
  kern::active().matmul_nn(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols());
  return c;
}

Array matmul_nt(const Array& a, const Array& b) {
  check(a.rank() == 2 && b.rank() == 2 && a.cols() == b.cols(), ErrorCode::kInternal,
        "matmul_nt: incompatible shapes " + a.shape_str() + " x " + b.shape_str());
  Array c({a.rows(), b.rows()});
  kern::active().matmul_nt(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.rows());
  return c;
}

Array matmul_tn(const Array& a, const Array& b) {
  check(a.rank() == 2 && b.rank() == 2 && a.rows() == b.rows(), ErrorCode::kInternal,
        "matmul_tn: incompatible shapes " + a.shape_str() + " x " + b.shape_str());
  Array c({a.cols(), b.cols()});
  kern::active().matmul_tn(a.data(), b.data(), c.data(), a.cols(), a.rows(), b.cols());
  return c;
}

Array map_tanh(const Array& a) {
  Array out = Array::zeros_like(a);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::tanh(a[i]);
  return out;
}

Array map_exp(const Array& a) {
  Array out = Array::zeros_like(a);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::exp(a[i]);
  return out;
}

Array map_log(const Array& a) {
  Array out = Array::zeros_like(a);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::log(a[i]);
  return out;
}

Array add_rowvec(const Array& m, const Array& v) {
  check(m.rank() == 2 && v.rank() == 1 && v.dim(0) == m.cols(), ErrorCode::kInternal,
        "add_rowvec: shapes " + m.shape_str() + " and " + v.shape_str());
  Array out = Array::zeros_like(m);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    kern::active().add(m.data() + i * m.cols(), v.data(), out.data() + i * m.cols(), m.cols());
  }
  return out;
}

namespace {

// Views an array as [outer, len, inner] around `axis` and applies fn to
// every fiber along that axis.
template <typename Fn>
void for_each_fiber(const Array& x, std::size_t axis, Fn&& fn) {
  check(axis < x.rank(), ErrorCode::kInternal, "axis out of range");
  std::size_t len = x.dim(axis);
  std::size_t inner = 1, outer = 1;
  for (std::size_t i = axis + 1; i < x.rank(); ++i) inner *= x.dim(i);
  for (std::size_t i = 0; i < axis; ++i) outer *= x.dim(i);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      fn(o * len * inner + in, inner, len);
    }
  }
}

}  // namespace

Array softmax(const Array& x, std::size_t axis) {
  Array out = Array::zeros_like(x);
  for_each_fiber(x, axis, [&](std::size_t base, std::size_t stride, std::size_t len) {
    double mx = x[base];
    for (std::size_t i = 1; i < len; ++i) mx = std::max(mx, x[base + i * stride]);
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      double e = std::exp(x[base + i * stride] - mx);
      out[base + i * stride] = e;
      s += e;
    }
    for (std::size_t i = 0; i < len; ++i) out[base + i * stride] /= s;
  });
  return out;
}

Array logsumexp(const Array& x, std::size_t axis) {
  std::vector<std::size_t> out_shape;
  for (std::size_t i = 0; i < x.rank(); ++i) {
    if (i != axis) out_shape.push_back(x.dim(i));
  }
  Array out(out_shape);
  std::size_t n = 0;
  for_each_fiber(x, axis, [&](std::size_t base, std::size_t stride, std::size_t len) {
    double mx = x[base];
    for (std::size_t i = 1; i < len; ++i) mx = std::max(mx, x[base + i * stride]);
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) s += std::exp(x[base + i * stride] - mx);
    out[n++] = mx + std::log(s);
  });
  return out;
}

Array softmax_rows(const Array& x) { return softmax(x, x.rank() - 1); }

Array log_softmax_rows(const Array& x) {
  check(x.rank() == 2, ErrorCode::kInternal, "log_softmax_rows: rank-2 expected");
  Array out = Array::zeros_like(x);
  std::size_t n = x.cols();
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double* row = x.data() + i * n;
    double mx = row[0];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += std::exp(row[j] - mx);
    double lse = mx + std::log(s);
    for (std::size_t j = 0; j < n; ++j) out.at2(i, j) = row[j] - lse;
  }
  return out;
}

std::vector<int> argmax_rows(const Array& x) {
  check(x.rank() == 2, ErrorCode::kInternal, "argmax_rows: rank-2 expected");
  std::vector<int> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    int best = 0;
    double bv = x.at2(i, 0);
    for (std::size_t j = 1; j < x.cols(); ++j) {
      if (x.at2(i, j) > bv) {
        bv = x.at2(i, j);
        best = static_cast<int>(j);
      }
    }
    out[i] = best;
  }
  return out;
}

Array gather_rows(const Array& x, const std::vector<int>& idx) {
  check(x.rank() == 2, ErrorCode::kInternal, "gather_rows: rank-2 expected");
  Array out({idx.size(), x.cols()});
  for (std::size_t i = 0; i < idx.size(); ++i) {
    check(idx[i] >= 0 && static_cast<std::size_t>(idx[i]) < x.rows(), ErrorCode::kInternal,
          "gather_rows: index out of range");
    std::copy_n(x.data() + static_cast<std::size_t>(idx[i]) * x.cols(), x.cols(),
                out.data() + i * x.cols());
  }
  return out;
}

Array l2_normalize_rows(const Array& x, double eps) {
  check(x.rank() == 2, ErrorCode::kInternal, "l2_normalize_rows: rank-2 expected");
  Array out = Array::zeros_like(x);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double* row = x.data() + i * x.cols();
    double n2 = kern::active().dot(row, row, x.cols());
    double inv = 1.0 / std::sqrt(n2 + eps);
    kern::active().scale(row, inv, out.data() + i * x.cols(), x.cols());
  }
  return out;
}

}  // namespace camguide
