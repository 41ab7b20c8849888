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

#include <cmath>

#include "camguide/error.hpp"
#include "camguide/mlp.hpp"
#include "camguide/tape.hpp"
#include "test_util.hpp"

using namespace camguide;
using testutil::finite_difference_grad;
using testutil::max_rel_error;
using testutil::random_array;

TEST_CASE("softmax basics") {
  Array x({2}, {0.0, 0.0});
  Array y = softmax(x, 0);
  CHECK(y[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(y[1] == doctest::Approx(0.5).epsilon(1e-12));

  Array x2({2}, {std::log(1.0), std::log(3.0)});
  Array y2 = softmax(x2, 0);
  CHECK(y2[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(y2[1] == doctest::Approx(0.75).epsilon(1e-12));

  // Shift invariance survives large magnitudes (max subtraction).
  Array big({2}, {1000.0, 1001.0});
  Array small({2}, {0.0, 1.0});
  Array yb = softmax(big, 0);
  Array ys = softmax(small, 0);
  CHECK(yb.all_finite());
  CHECK(yb[0] == doctest::Approx(ys[0]).epsilon(1e-12));
  CHECK(yb[1] == doctest::Approx(ys[1]).epsilon(1e-12));
}

TEST_CASE("softmax rows sum to one and stay in (0,1]") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    Array x = random_array({5, 7}, rng, -30.0, 30.0);
    Array y = softmax(x, 1);
    for (std::size_t r = 0; r < 5; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < 7; ++c) {
        double v = y.at2(r, c);
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
        s += v;
      }
      CHECK(std::fabs(s - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("logsumexp properties") {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    Array x = random_array({1, 9}, rng, -40.0, 40.0);
    double lse = logsumexp(x, 1)[0];
    double mx = x[0];
    for (std::size_t i = 1; i < x.size(); ++i) mx = std::max(mx, x[i]);
    CHECK(lse >= mx);
    double c = rng.uniform(-100.0, 100.0);
    Array xc = x;
    for (std::size_t i = 0; i < xc.size(); ++i) xc[i] += c;
    CHECK(std::fabs(logsumexp(xc, 1)[0] - (lse + c)) <= 1e-12 * std::max(1.0, std::fabs(lse + c)));
  }
}

TEST_CASE("mlp zero weights give zero output; identity layer is identity") {
  MlpSpec spec{{3, 3}, ""};
  ParamVector zero;
  zero["L0.W"] = Array({3, 3});
  zero["L0.b"] = Array({3});
  Array input({2, 3}, {1.0, 2.0, 3.0, -1.0, 0.5, 4.0});
  Array out = mlp_eval(zero, input, spec);
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == 0.0);

  ParamVector ident = zero;
  ident["L0.W"].at2(0, 0) = 1.0;
  ident["L0.W"].at2(1, 1) = 1.0;
  ident["L0.W"].at2(2, 2) = 1.0;
  Array out2 = mlp_eval(ident, input, spec);
  for (std::size_t i = 0; i < input.size(); ++i) CHECK(out2[i] == input[i]);
}

TEST_CASE("mlp forward matches a straight-line reimplementation") {
  // 2-3-2 tanh MLP, seed-0 weights, fixed input; oracle below evaluates the
  // formula directly without any tape machinery.
  MlpSpec spec{{2, 3, 2}, ""};
  ParamVector p = mlp_init(spec, 0);
  Array x({1, 2}, {0.35, -1.2});

  const Array& w0 = p.at("L0.W");
  const Array& b0 = p.at("L0.b");
  const Array& w1 = p.at("L1.W");
  const Array& b1 = p.at("L1.b");
  double h[3];
  for (int j = 0; j < 3; ++j) {
    h[j] = std::tanh(x[0] * w0.at2(0, j) + x[1] * w0.at2(1, j) + b0[j]);
  }
  double expect[2];
  for (int k = 0; k < 2; ++k) {
    expect[k] = h[0] * w1.at2(0, k) + h[1] * w1.at2(1, k) + h[2] * w1.at2(2, k) + b1[k];
  }

  Array out = mlp_eval(p, x, spec);
  CHECK(std::fabs(out[0] - expect[0]) <= 1e-12);
  CHECK(std::fabs(out[1] - expect[1]) <= 1e-12);

  // Taped forward agrees with the tape-free one.
  Tape tape;
  TapedParams lifted = lift(tape, p);
  Tensor t = mlp_forward(tape, lifted, x, spec);
  CHECK(t.val()[0] == out[0]);
  CHECK(t.val()[1] == out[1]);

  // Determinism.
  Array out2 = mlp_eval(p, x, spec);
  CHECK(out2[0] == out[0]);
  CHECK(out2[1] == out[1]);
}

TEST_CASE("mlp shape mismatch names the layer") {
  MlpSpec spec{{3, 2}, ""};
  ParamVector p = mlp_init(spec, 1);
  Array bad({2, 4});
  CHECK_THROWS_WITH_AS(mlp_eval(p, bad, spec),
                       doctest::Contains("mlp layer 0"), Error);
}

TEST_CASE("grad: sum gives ones, dot gives 2x") {
  Tape tape;
  ParamVector p;
  p["theta"] = Array({2}, {1.0, 2.0});
  TapedParams lifted = lift(tape, p);
  Tensor root = sum(mul(lifted.at("theta"), lifted.at("theta")));  // dot(theta, theta)
  ParamVector g = grad(tape, root, lifted);
  CHECK(g.at("theta")[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(g.at("theta")[1] == doctest::Approx(4.0).epsilon(1e-12));

  Tape tape2;
  TapedParams lifted2 = lift(tape2, p);
  ParamVector g2 = grad(tape2, sum(lifted2.at("theta")), lifted2);
  CHECK(g2.at("theta")[0] == 1.0);
  CHECK(g2.at("theta")[1] == 1.0);
}

TEST_CASE("grad rejects non-scalar roots") {
  Tape tape;
  ParamVector p;
  p["theta"] = Array({3}, {1.0, 2.0, 3.0});
  TapedParams lifted = lift(tape, p);
  CHECK_THROWS_AS(grad(tape, lifted.at("theta"), lifted), Error);
}

namespace {

// A scalar loss exercising most tape primitives at once.
double composite_loss(const ParamVector& params, const Array& input, const MlpSpec& spec) {
  Tape tape;
  TapedParams lifted = lift(tape, params);
  Tensor h = mlp_forward(tape, lifted, input, spec);
  Tensor p = softmax_rows(h);
  Tensor lp = log_softmax_rows(h);
  Tensor norm = l2_normalize_rows(h);
  Tensor lse = logsumexp_rows(h);
  Tensor term1 = mean(mul(p, lp));
  Tensor term2 = sum(mul(norm, norm));
  Tensor term3 = mean(lse);
  Tensor root = add(add(term1, mul_scalar(term2, 0.25)), term3);
  return root.val()[0];
}

}  // namespace

TEST_CASE("tape gradients match central finite differences on random inputs") {
  MlpSpec spec{{4, 6, 5}, ""};
  Rng rng(1234);
  int trials = 100;
  for (int trial = 0; trial < trials; ++trial) {
    ParamVector params = testutil::randomize(mlp_init(spec, 0), rng, -0.8, 0.8);
    Array input = random_array({3, 4}, rng);

    Tape tape;
    TapedParams lifted = lift(tape, params);
    Tensor h = mlp_forward(tape, lifted, input, spec);
    Tensor p = softmax_rows(h);
    Tensor lp = log_softmax_rows(h);
    Tensor norm = l2_normalize_rows(h);
    Tensor lse = logsumexp_rows(h);
    Tensor term1 = mean(mul(p, lp));
    Tensor term2 = sum(mul(norm, norm));
    Tensor term3 = mean(lse);
    Tensor root = add(add(term1, mul_scalar(term2, 0.25)), term3);
    ParamVector analytic = grad(tape, root, lifted);

    ParamVector fd = finite_difference_grad(
        params, [&](const ParamVector& q) { return composite_loss(q, input, spec); });
    CHECK(max_rel_error(analytic, fd) < 1e-4);
  }
}

TEST_CASE("gather and pick primitives differentiate correctly") {
  Rng rng(77);
  ParamVector params;
  params["m"] = random_array({5, 4}, rng);
  std::vector<int> rows = {4, 0, 2};
  std::vector<int> cols = {1, 3};
  std::vector<int> picks = {0, 3, 2};

  auto loss = [&](const ParamVector& q) {
    Tape tape;
    TapedParams lifted = lift(tape, q);
    Tensor m = lifted.at("m");
    Tensor g = gather_rows(m, rows);
    Tensor gc = gather_cols(g, cols);
    Tensor pick = pick_per_row(g, picks);
    Tensor root = add(sum(mul(gc, gc)), mean(pick));
    return root.val()[0];
  };

  Tape tape;
  TapedParams lifted = lift(tape, params);
  Tensor m = lifted.at("m");
  Tensor g = gather_rows(m, rows);
  Tensor gc = gather_cols(g, cols);
  Tensor pick = pick_per_row(g, picks);
  Tensor root = add(sum(mul(gc, gc)), mean(pick));
  ParamVector analytic = grad(tape, root, lifted);

  ParamVector fd = finite_difference_grad(params, loss);
  CHECK(max_rel_error(analytic, fd) < 1e-4);
}

TEST_CASE("array invariants") {
  Array empty_scalar = Array::scalar(3.5);
  CHECK(empty_scalar.rank() == 0);
  CHECK(empty_scalar.size() == 1);

  CHECK_THROWS_AS(Array({2, 3}, {1.0}), Error);  // length mismatch

  Rng rng(5);
  Array a = random_array({3, 4}, rng);
  Array b = random_array({3, 4}, rng);
  Array s = add(a, b);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i] == a[i] + b[i]);
}
