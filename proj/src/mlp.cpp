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
#include "camguide/mlp.hpp"

#include <cmath>

#include "camguide/error.hpp"
#include "camguide/rng.hpp"

namespace camguide {

std::string MlpSpec::weight_name(std::size_t layer) const {
  return prefix + "L" + std::to_string(layer) + ".W";
}

std::string MlpSpec::bias_name(std::size_t layer) const {
  return prefix + "L" + std::to_string(layer) + ".b";
}

ParamVector mlp_init(const MlpSpec& spec, std::uint64_t seed) {
  check(spec.sizes.size() >= 2, ErrorCode::kConfig, "mlp spec needs at least two layer sizes");
  ParamVector p;
  Rng rng = derive_rng(seed, {stream::kInit});
  for (std::size_t l = 0; l + 1 < spec.sizes.size(); ++l) {
    std::size_t fan_in = spec.sizes[l];
    std::size_t fan_out = spec.sizes[l + 1];
    double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Array w({fan_in, fan_out});
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-bound, bound);
    p[spec.weight_name(l)] = std::move(w);
    p[spec.bias_name(l)] = Array({fan_out});
  }
  return p;
}

Tensor TapedParams::at(const std::string& name) const {
  auto it = tensors.find(name);
  check(it != tensors.end(), ErrorCode::kInternal, "no lifted parameter named '" + name + "'");
  return it->second;
}

TapedParams lift(Tape& tape, const ParamVector& params) {
  TapedParams out;
  for (const auto& [name, arr] : params) out.tensors.emplace(name, tape.leaf(arr));
  return out;
}

namespace {

void check_layer_input(std::size_t got, std::size_t want, std::size_t layer) {
  check(got == want, ErrorCode::kInternal,
        "mlp layer " + std::to_string(layer) + ": input width " + std::to_string(got) +
            " does not match expected " + std::to_string(want));
}

}  // namespace

Tensor mlp_forward(Tape& tape, const TapedParams& params, Tensor input, const MlpSpec& spec) {
  check(input.val().rank() == 2, ErrorCode::kInternal, "mlp input must be rank 2");
  Tensor h = input;
  for (std::size_t l = 0; l + 1 < spec.sizes.size(); ++l) {
    check_layer_input(h.val().cols(), spec.sizes[l], l);
    Tensor z = add_rowvec(matmul(h, params.at(spec.weight_name(l))),
                          params.at(spec.bias_name(l)));
    bool last = (l + 2 == spec.sizes.size());
    h = last ? z : tanh(z);
  }
  return h;
}

Tensor mlp_forward(Tape& tape, const TapedParams& params, const Array& input,
                   const MlpSpec& spec) {
  check(input.rank() == 2, ErrorCode::kInternal, "mlp input must be rank 2");
  check_layer_input(input.cols(), spec.sizes[0], 0);
  // First layer takes the constant input directly; later layers flow on tape.
  Tensor z0 = add_rowvec(matmul(input, params.at(spec.weight_name(0))),
                         params.at(spec.bias_name(0)));
  Tensor h = (spec.sizes.size() == 2) ? z0 : tanh(z0);
  for (std::size_t l = 1; l + 1 < spec.sizes.size(); ++l) {
    check_layer_input(h.val().cols(), spec.sizes[l], l);
    Tensor z = add_rowvec(matmul(h, params.at(spec.weight_name(l))),
                          params.at(spec.bias_name(l)));
    bool last = (l + 2 == spec.sizes.size());
    h = last ? z : tanh(z);
  }
  (void)tape;
  return h;
}

Array mlp_eval(const ParamVector& params, const Array& input, const MlpSpec& spec) {
  check(input.rank() == 2, ErrorCode::kInternal, "mlp input must be rank 2");
  Array h = input;
  for (std::size_t l = 0; l + 1 < spec.sizes.size(); ++l) {
    check_layer_input(h.cols(), spec.sizes[l], l);
    Array z = add_rowvec(matmul(h, params.at(spec.weight_name(l))),
                         params.at(spec.bias_name(l)));
    bool last = (l + 2 == spec.sizes.size());
    h = last ? std::move(z) : map_tanh(z);
  }
  return h;
}

ParamVector grad(Tape& tape, Tensor root, const TapedParams& leaves) {
  check(root.val().size() == 1, ErrorCode::kInternal, "grad: root is not scalar");
  tape.backward(root);
  ParamVector g;
  for (const auto& [name, tensor] : leaves.tensors) g[name] = tape.grad(tensor);
  return g;
}

}  // namespace camguide
