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
#include "camguide/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

// AVX2 backend. Mirrors the scalar reference order exactly: one vector op
// per block of four, no fma, reductions combined as (l0+l1)+(l2+l3), so
// results are bit-identical to the scalar backend (checked in tests).

namespace camguide::kern {
namespace {

void v_add(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t main = n - n % 4;
  for (std::size_t i = 0; i < main; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (std::size_t i = main; i < n; ++i) out[i] = x[i] + y[i];
}

void v_sub(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t main = n - n % 4;
  for (std::size_t i = 0; i < main; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (std::size_t i = main; i < n; ++i) out[i] = x[i] - y[i];
}

void v_mul(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t main = n - n % 4;
  for (std::size_t i = 0; i < main; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (std::size_t i = main; i < n; ++i) out[i] = x[i] * y[i];
}

void v_scale(const double* x, double a, double* out, std::size_t n) {
  __m256d va = _mm256_set1_pd(a);
  std::size_t main = n - n % 4;
  for (std::size_t i = 0; i < main; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  }
  for (std::size_t i = main; i < n; ++i) out[i] = a * x[i];
}

void v_axpby(double a, const double* x, double b, double* y, std::size_t n) {
  __m256d va = _mm256_set1_pd(a);
  __m256d vb = _mm256_set1_pd(b);
  std::size_t main = n - n % 4;
  for (std::size_t i = 0; i < main; i += 4) {
    __m256d ax = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    __m256d by = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(ax, by));
  }
  for (std::size_t i = main; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

inline double reduce_lanes(__m256d acc) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double v_dot(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t main = n - n % 4;
  for (std::size_t i = 0; i < main; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  double total = reduce_lanes(acc);
  for (std::size_t i = main; i < n; ++i) total += x[i] * y[i];
  return total;
}

double v_sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t main = n - n % 4;
  for (std::size_t i = 0; i < main; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  }
  double total = reduce_lanes(acc);
  for (std::size_t i = main; i < n; ++i) total += x[i];
  return total;
}

void v_matmul_nn(const double* a, const double* b, double* c,
                 std::size_t m, std::size_t k, std::size_t n) {
  std::size_t nmain = n - n % 4;
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t kk = 0; kk < k; ++kk) {
      double av = a[i * k + kk];
      const double* brow = b + kk * n;
      __m256d vav = _mm256_set1_pd(av);
      for (std::size_t j = 0; j < nmain; j += 4) {
        __m256d prod = _mm256_mul_pd(vav, _mm256_loadu_pd(brow + j));
        _mm256_storeu_pd(crow + j, _mm256_add_pd(_mm256_loadu_pd(crow + j), prod));
      }
      for (std::size_t j = nmain; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void v_matmul_nt(const double* a, const double* b, double* c,
                 std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      c[i * n + j] += v_dot(arow, b + j * k, k);
    }
  }
}

void v_matmul_tn(const double* a, const double* b, double* c,
                 std::size_t m, std::size_t k, std::size_t n) {
  std::size_t nmain = n - n % 4;
  for (std::size_t kk = 0; kk < k; ++kk) {
    const double* arow = a + kk * m;
    const double* brow = b + kk * n;
    for (std::size_t i = 0; i < m; ++i) {
      double av = arow[i];
      double* crow = c + i * n;
      __m256d vav = _mm256_set1_pd(av);
      for (std::size_t j = 0; j < nmain; j += 4) {
        __m256d prod = _mm256_mul_pd(vav, _mm256_loadu_pd(brow + j));
        _mm256_storeu_pd(crow + j, _mm256_add_pd(_mm256_loadu_pd(crow + j), prod));
      }
      for (std::size_t j = nmain; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace

const Kernels& avx2_kernels() {
  static const Kernels k = {
      "avx2", v_add,  v_sub, v_mul,       v_scale,     v_axpby,
      v_dot,  v_sum,  v_matmul_nn,        v_matmul_nt, v_matmul_tn,
  };
  return k;
}

}  // namespace camguide::kern

#endif  // x86_64
