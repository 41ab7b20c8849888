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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "camguide/kernels.hpp"
#include "camguide/rng.hpp"

using namespace camguide;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

// Sizes chosen to hit every tail case of the 4-wide blocking.
const std::size_t kSizes[] = {1, 2, 3, 4, 5, 7, 8, 15, 16, 33, 100, 257};

}  // namespace

TEST_CASE("matmul_nn matches a naive triple loop") {
  Rng rng(11);
  const kern::Kernels& k = kern::scalar_kernels();
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t m = 1 + rng.uniform_int(6);
    std::size_t kk = 1 + rng.uniform_int(6);
    std::size_t n = 1 + rng.uniform_int(6);
    std::vector<double> a = random_vec(m * kk, rng);
    std::vector<double> b = random_vec(kk * n, rng);
    std::vector<double> c(m * n, 0.0);
    k.matmul_nn(a.data(), b.data(), c.data(), m, kk, n);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double want = 0.0;
        for (std::size_t x = 0; x < kk; ++x) want += a[i * kk + x] * b[x * n + j];
        CHECK(c[i * n + j] == doctest::Approx(want).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("transposed matmuls agree with matmul_nn on transposed inputs") {
  Rng rng(13);
  const kern::Kernels& k = kern::scalar_kernels();
  std::size_t m = 5, kk = 7, n = 4;
  std::vector<double> a = random_vec(m * kk, rng);
  std::vector<double> b = random_vec(kk * n, rng);

  std::vector<double> want(m * n, 0.0);
  k.matmul_nn(a.data(), b.data(), want.data(), m, kk, n);

  // nt: feed b transposed.
  std::vector<double> bt(n * kk);
  for (std::size_t i = 0; i < kk; ++i) {
    for (std::size_t j = 0; j < n; ++j) bt[j * kk + i] = b[i * n + j];
  }
  std::vector<double> c_nt(m * n, 0.0);
  k.matmul_nt(a.data(), bt.data(), c_nt.data(), m, kk, n);
  for (std::size_t i = 0; i < m * n; ++i) {
    CHECK(c_nt[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }

  // tn: feed a transposed.
  std::vector<double> at(kk * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < kk; ++j) at[j * m + i] = a[i * kk + j];
  }
  std::vector<double> c_tn(m * n, 0.0);
  k.matmul_tn(at.data(), b.data(), c_tn.data(), m, kk, n);
  for (std::size_t i = 0; i < m * n; ++i) {
    CHECK(c_tn[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
}

#if defined(__x86_64__) || defined(_M_X64)

TEST_CASE("avx2 elementwise kernels are bit-identical to scalar") {
  if (!kern::avx2_available()) return;
  const kern::Kernels& s = kern::scalar_kernels();
  const kern::Kernels& v = kern::avx2_kernels();
  Rng rng(21);
  for (std::size_t n : kSizes) {
    std::vector<double> x = random_vec(n, rng);
    std::vector<double> y = random_vec(n, rng);
    std::vector<double> o1(n), o2(n);

    s.add(x.data(), y.data(), o1.data(), n);
    v.add(x.data(), y.data(), o2.data(), n);
    CHECK(o1 == o2);

    s.sub(x.data(), y.data(), o1.data(), n);
    v.sub(x.data(), y.data(), o2.data(), n);
    CHECK(o1 == o2);

    s.mul(x.data(), y.data(), o1.data(), n);
    v.mul(x.data(), y.data(), o2.data(), n);
    CHECK(o1 == o2);

    s.scale(x.data(), 1.7, o1.data(), n);
    v.scale(x.data(), 1.7, o2.data(), n);
    CHECK(o1 == o2);

    std::vector<double> y1 = y, y2 = y;
    s.axpby(0.3, x.data(), 0.9, y1.data(), n);
    v.axpby(0.3, x.data(), 0.9, y2.data(), n);
    CHECK(y1 == y2);

    CHECK(s.dot(x.data(), y.data(), n) == v.dot(x.data(), y.data(), n));
    CHECK(s.sum(x.data(), n) == v.sum(x.data(), n));
  }
}

TEST_CASE("avx2 matmul kernels are bit-identical to scalar") {
  if (!kern::avx2_available()) return;
  const kern::Kernels& s = kern::scalar_kernels();
  const kern::Kernels& v = kern::avx2_kernels();
  Rng rng(22);
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t m = 1 + rng.uniform_int(9);
    std::size_t kk = 1 + rng.uniform_int(9);
    std::size_t n = 1 + rng.uniform_int(9);
    std::vector<double> a = random_vec(m * kk, rng);
    std::vector<double> b_nn = random_vec(kk * n, rng);
    std::vector<double> b_nt = random_vec(n * kk, rng);
    std::vector<double> a_tn = random_vec(kk * m, rng);

    std::vector<double> c1(m * n, 0.25), c2(m * n, 0.25);  // accumulate semantics
    s.matmul_nn(a.data(), b_nn.data(), c1.data(), m, kk, n);
    v.matmul_nn(a.data(), b_nn.data(), c2.data(), m, kk, n);
    CHECK(c1 == c2);

    std::fill(c1.begin(), c1.end(), 0.0);
    std::fill(c2.begin(), c2.end(), 0.0);
    s.matmul_nt(a.data(), b_nt.data(), c1.data(), m, kk, n);
    v.matmul_nt(a.data(), b_nt.data(), c2.data(), m, kk, n);
    CHECK(c1 == c2);

    std::fill(c1.begin(), c1.end(), 0.0);
    std::fill(c2.begin(), c2.end(), 0.0);
    s.matmul_tn(a_tn.data(), b_nn.data(), c1.data(), m, kk, n);
    v.matmul_tn(a_tn.data(), b_nn.data(), c2.data(), m, kk, n);
    CHECK(c1 == c2);
  }
}

#endif  // x86_64

TEST_CASE("backend dispatch honors forcing") {
  kern::force_backend("scalar");
  CHECK(std::string(kern::active().name) == "scalar");
#if defined(__x86_64__) || defined(_M_X64)
  if (kern::avx2_available()) {
    kern::force_backend("avx2");
    CHECK(std::string(kern::active().name) == "avx2");
  }
#endif
  kern::force_backend(nullptr);
  CHECK((std::string(kern::active().name) == "scalar" ||
         std::string(kern::active().name) == "avx2"));
}
