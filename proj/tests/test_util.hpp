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
#ifndef CAMGUIDE_TESTS_TEST_UTIL_HPP_
#define CAMGUIDE_TESTS_TEST_UTIL_HPP_

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "camguide/mlp.hpp"
#include "camguide/params.hpp"
#include "camguide/rng.hpp"

namespace camguide::testutil {

inline Array random_array(std::vector<std::size_t> shape, Rng& rng, double lo = -1.0,
                          double hi = 1.0) {
  Array a(std::move(shape));
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.uniform(lo, hi);
  return a;
}

inline ParamVector randomize(const ParamVector& like, Rng& rng, double lo = -1.0,
                             double hi = 1.0) {
  ParamVector out = like;
  for (auto& [name, arr] : out) {
    for (std::size_t i = 0; i < arr.size(); ++i) arr[i] = rng.uniform(lo, hi);
  }
  return out;
}

// Central finite differences of a scalar function of the parameters,
// evaluated with step h per coordinate. The loss closure must be a pure
// function of the ParamVector.
inline ParamVector finite_difference_grad(const ParamVector& params,
                                          const std::function<double(const ParamVector&)>& f,
                                          double h = 1e-5) {
  ParamVector grad = params;
  for (auto& [name, arr] : grad) {
    for (std::size_t i = 0; i < arr.size(); ++i) {
      ParamVector plus = params;
      ParamVector minus = params;
      plus[name][i] += h;
      minus[name][i] -= h;
      arr[i] = (f(plus) - f(minus)) / (2.0 * h);
    }
  }
  return grad;
}

// Maximum relative error between two gradients, using a symmetric
// denominator with an absolute floor so that near-zero entries compare
// absolutely.
inline double max_rel_error(const ParamVector& a, const ParamVector& b, double floor = 1e-6) {
  double worst = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  for (; ia != a.end(); ++ia, ++ib) {
    for (std::size_t i = 0; i < ia->second.size(); ++i) {
      double x = ia->second[i], y = ib->second[i];
      double denom = std::max({std::fabs(x), std::fabs(y), floor});
      worst = std::max(worst, std::fabs(x - y) / denom);
    }
  }
  return worst;
}

}  // namespace camguide::testutil

#endif  // CAMGUIDE_TESTS_TEST_UTIL_HPP_
