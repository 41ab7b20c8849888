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
#ifndef CAMGUIDE_KERNELS_HPP_
#define CAMGUIDE_KERNELS_HPP_

#include <cstddef>

namespace camguide::kern {

// Dense f64 inner loops behind the array layer. Every backend must produce
// bit-identical results, so the evaluation order is part of the contract:
//
//  * elementwise ops: independent per element, natural order;
//  * dot/sum reductions: four independent accumulators over index blocks of
//    four (lane j takes indices i with i % 4 == j), combined as
//    (acc0 + acc1) + (acc2 + acc3), then the tail added sequentially;
//  * matmul_nn: loops (i, k, j), c[i,j] += a[i,k] * b[k,j];
//  * matmul_nt: c[i,j] += dot(a row i, b row j) with the dot contract above;
//  * matmul_tn: loops (k, i, j), c[i,j] += a[k,i] * b[k,j].
//
// All matmul kernels accumulate into c; callers zero it first. No backend
// may use fma contraction (it would change the rounding).
struct Kernels {
  const char* name;

  void (*add)(const double* x, const double* y, double* out, std::size_t n);
  void (*sub)(const double* x, const double* y, double* out, std::size_t n);
  void (*mul)(const double* x, const double* y, double* out, std::size_t n);
  // out[i] = a * x[i]
  void (*scale)(const double* x, double a, double* out, std::size_t n);
  // y[i] = a * x[i] + b * y[i]
  void (*axpby)(double a, const double* x, double b, double* y, std::size_t n);

  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*sum)(const double* x, std::size_t n);

  // a: m x k, b: k x n, c: m x n (accumulate)
  void (*matmul_nn)(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n);
  // a: m x k, b: n x k, c: m x n (accumulate), c[i,j] += <a_i, b_j>
  void (*matmul_nt)(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n);
  // a: k x m, b: k x n, c: m x n (accumulate)
  void (*matmul_tn)(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n);
};

const Kernels& scalar_kernels();

#if defined(__x86_64__) || defined(_M_X64)
const Kernels& avx2_kernels();
#endif

bool avx2_available();

// Active backend. Resolved once: CAMGUIDE_KERNELS=scalar|avx2 overrides,
// otherwise avx2 when the CPU supports it, scalar otherwise.
const Kernels& active();

// Test hook: force a backend by name ("scalar", "avx2"), nullptr restores
// the automatic choice. Throws if the backend is unavailable.
void force_backend(const char* name);

}  // namespace camguide::kern

#endif  // CAMGUIDE_KERNELS_HPP_
