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
#ifndef CAMGUIDE_ARRAY_HPP_
#define CAMGUIDE_ARRAY_HPP_

#include <cstddef>
#include <string>
#include <vector>

namespace camguide {

// Dense row-major f64 array. Rank 0 is a scalar (shape {}, one element).
class Array {
 public:
  Array() : shape_{}, data_(1, 0.0) {}
  explicit Array(std::vector<std::size_t> shape);
  Array(std::vector<std::size_t> shape, std::vector<double> data);

  static Array scalar(double v);
  static Array zeros_like(const Array& a) { return Array(a.shape_); }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t i) const { return shape_[i]; }
  std::size_t rows() const;  // rank-2 only
  std::size_t cols() const;  // rank-2 only

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at2(std::size_t i, std::size_t j) { return data_[i * cols_cached_ + j]; }
  double at2(std::size_t i, std::size_t j) const { return data_[i * cols_cached_ + j]; }

  bool same_shape(const Array& o) const { return shape_ == o.shape_; }
  bool all_finite() const;
  std::string shape_str() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
  std::size_t cols_cached_ = 0;
};

// Elementwise / BLAS-ish helpers, all dispatching through kern::active().
Array add(const Array& a, const Array& b);
Array sub(const Array& a, const Array& b);
Array mul(const Array& a, const Array& b);
Array scale(const Array& a, double s);
// y = a*x + b*y in place
void axpby_inplace(double a, const Array& x, double b, Array& y);
double dot(const Array& a, const Array& b);
double sum(const Array& a);

// c = a(m x k) * b(k x n)
Array matmul(const Array& a, const Array& b);
// c = a(m x k) * b(n x k)^T
Array matmul_nt(const Array& a, const Array& b);
// c = a(k x m)^T * b(k x n)
Array matmul_tn(const Array& a, const Array& b);

Array map_tanh(const Array& a);
Array map_exp(const Array& a);
Array map_log(const Array& a);

// Broadcast a length-n vector over the rows of an m x n matrix.
Array add_rowvec(const Array& m, const Array& v);

// Softmax / logsumexp along `axis` of an arbitrary-rank array. Both are
// overflow-safe via max subtraction.
Array softmax(const Array& x, std::size_t axis);
Array logsumexp(const Array& x, std::size_t axis);

// Row-wise helpers for rank-2 arrays (axis = 1 specializations).
Array softmax_rows(const Array& x);
Array log_softmax_rows(const Array& x);
// Argmax per row; ties break toward the lowest index.
std::vector<int> argmax_rows(const Array& x);

Array gather_rows(const Array& x, const std::vector<int>& idx);
Array l2_normalize_rows(const Array& x, double eps = 1e-24);

}  // namespace camguide

#endif  // CAMGUIDE_ARRAY_HPP_
