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
#include "camguide/teacher.hpp"
#include "test_util.hpp"

using namespace camguide;

namespace {

ParamVector constant_params(double v) {
  ParamVector p;
  p["w"] = Array({2, 2}, {v, v, v, v});
  p["b"] = Array({2}, {v, v});
  return p;
}

}  // namespace

TEST_CASE("one ema step: alpha 0.999, shadow 0, student 1 gives 0.001") {
  TeacherState state = make_teacher(constant_params(0.0), 0.999);
  ema_update(state, constant_params(1.0));
  for (const auto& [name, arr] : state.shadow) {
    for (std::size_t i = 0; i < arr.size(); ++i) {
      CHECK(arr[i] == doctest::Approx(0.001).epsilon(1e-12));
    }
  }
  CHECK(state.step == 1);
}

TEST_CASE("alpha 0 copies the student exactly") {
  TeacherState state = make_teacher(constant_params(0.4), 0.0);
  ema_update(state, constant_params(-2.5));
  for (const auto& [name, arr] : state.shadow) {
    for (std::size_t i = 0; i < arr.size(); ++i) CHECK(arr[i] == -2.5);
  }
}

TEST_CASE("alpha 1 never moves the teacher") {
  TeacherState state = make_teacher(constant_params(0.7), 1.0);
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    ema_update(state, testutil::randomize(constant_params(0.0), rng));
  }
  for (const auto& [name, arr] : state.shadow) {
    for (std::size_t i = 0; i < arr.size(); ++i) CHECK(arr[i] == 0.7);
  }
}

TEST_CASE("geometric decay toward a constant student") {
  // |shadow_t - theta*| = alpha^t |shadow_0 - theta*| to 1e-12 for t <= 50.
  for (double alpha : {0.0, 0.5, 0.999, 1.0}) {
    Rng rng(11);
    ParamVector target = testutil::randomize(constant_params(0.0), rng);
    ParamVector init = testutil::randomize(constant_params(0.0), rng);
    TeacherState state = make_teacher(init, alpha);
    for (int t = 1; t <= 50; ++t) {
      ema_update(state, target);
      double factor = std::pow(alpha, t);
      auto si = state.shadow.begin();
      auto ti = target.begin();
      auto ii = init.begin();
      for (; si != state.shadow.end(); ++si, ++ti, ++ii) {
        for (std::size_t i = 0; i < si->second.size(); ++i) {
          double expect = factor * (ii->second[i] - ti->second[i]);
          CHECK(std::fabs((si->second[i] - ti->second[i]) - expect) <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("shadow stays inside the convex hull of its inputs") {
  Rng rng(5);
  TeacherState state = make_teacher(constant_params(0.3), 0.97);
  for (int t = 0; t < 100; ++t) {
    ParamVector student = constant_params(rng.uniform(-1.0, 1.0));
    ema_update(state, student);
    for (const auto& [name, arr] : state.shadow) {
      for (std::size_t i = 0; i < arr.size(); ++i) {
        CHECK(arr[i] >= -1.0);
        CHECK(arr[i] <= 1.0);
      }
    }
  }
}

TEST_CASE("ema rejects structure mismatches naming the parameter") {
  TeacherState state = make_teacher(constant_params(0.0), 0.5);
  ParamVector bad;
  bad["w"] = Array({2, 2});
  bad["c"] = Array({2});
  CHECK_THROWS_WITH_AS(ema_update(state, bad), doctest::Contains("parameter"), Error);

  ParamVector bad_shape;
  bad_shape["w"] = Array({2, 3});
  bad_shape["b"] = Array({2});
  CHECK_THROWS_WITH_AS(ema_update(state, bad_shape), doctest::Contains("'w'"), Error);
}

TEST_CASE("teacher_predict equals student forward when shadow equals student") {
  Model3dSpec spec;
  spec.feature_dim = 5;
  spec.trunk_hidden = {6};
  spec.trunk_out = 6;
  spec.class_count = 3;
  spec.guide_dim = 4;
  ParamVector student = model3d_init(spec, 42);
  TeacherState state = make_teacher(student, 0.999);
  Rng rng(7);
  Array feats = testutil::random_array({10, 5}, rng);
  EvalPrediction tp = teacher_predict(state, feats, spec);
  EvalPrediction sp = model3d_eval(student, feats, spec);
  for (std::size_t i = 0; i < tp.logits.size(); ++i) CHECK(tp.logits[i] == sp.logits[i]);
  for (std::size_t i = 0; i < tp.aux.size(); ++i) CHECK(tp.aux[i] == sp.aux[i]);

  // Oracle: straight-line evaluation of the trunk + heads for one point.
  const Array& w0 = student.at("trunk.L0.W");
  const Array& b0 = student.at("trunk.L0.b");
  const Array& w1 = student.at("trunk.L1.W");
  const Array& b1 = student.at("trunk.L1.b");
  const Array& wc = student.at("cls.L0.W");
  const Array& bc = student.at("cls.L0.b");
  double h1[6], h2[6];
  for (int j = 0; j < 6; ++j) {
    double z = b0[j];
    for (int i = 0; i < 5; ++i) z += feats.at2(0, i) * w0.at2(i, j);
    h1[j] = std::tanh(z);
  }
  for (int j = 0; j < 6; ++j) {
    double z = b1[j];
    for (int i = 0; i < 6; ++i) z += h1[i] * w1.at2(i, j);
    h2[j] = std::tanh(z);  // trunk output activation before the heads
  }
  for (int c = 0; c < 3; ++c) {
    double z = bc[c];
    for (int i = 0; i < 6; ++i) z += h2[i] * wc.at2(i, c);
    CHECK(std::fabs(tp.logits.at2(0, c) - z) <= 1e-12);
  }
}

TEST_CASE("assign_classes argmax with low-index tie break") {
  Array logits({3, 3}, {0.0, 1.0, 0.0,   // one-hot-ish
                        2.0, 2.0, -1.0,  // exact tie: lowest index wins
                        -5.0, -5.0, -5.0});
  std::vector<int> cls = assign_classes(logits);
  CHECK(cls[0] == 1);
  CHECK(cls[1] == 0);
  CHECK(cls[2] == 0);
}

TEST_CASE("assign_classes matches brute force and is shift/scale invariant") {
  Rng rng(9);
  for (int trial = 0; trial < 1000; ++trial) {
    Array logits = testutil::random_array({1, 6}, rng, -3.0, 3.0);
    int got = assign_classes(logits)[0];
    int want = 0;
    for (int j = 1; j < 6; ++j) {
      if (logits[j] > logits[want]) want = j;
    }
    CHECK(got == want);

    double c = rng.uniform(-10.0, 10.0);
    double s = rng.uniform(0.1, 5.0);
    Array shifted = logits;
    for (std::size_t j = 0; j < 6; ++j) shifted[j] = logits[j] * s + c;
    CHECK(assign_classes(shifted)[0] == got);
  }
}
