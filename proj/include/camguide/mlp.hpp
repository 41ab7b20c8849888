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
#ifndef CAMGUIDE_MLP_HPP_
#define CAMGUIDE_MLP_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "camguide/params.hpp"
#include "camguide/tape.hpp"

namespace camguide {

// Layer widths, input first: {in, hidden..., out}. Hidden activations are
// tanh, the final layer is linear. Weights are row-major (in x out), so a
// batch of row vectors maps through y = x W + b. `prefix` is prepended to
// parameter names so several specs can share one flat ParamVector.
struct MlpSpec {
  std::vector<std::size_t> sizes;
  std::string prefix;

  std::size_t layer_count() const { return sizes.size() - 1; }
  std::size_t in_dim() const { return sizes.front(); }
  std::size_t out_dim() const { return sizes.back(); }
  std::string weight_name(std::size_t layer) const;
  std::string bias_name(std::size_t layer) const;
};

// Xavier-uniform weights, zero biases, deterministic in seed.
ParamVector mlp_init(const MlpSpec& spec, std::uint64_t seed);

// ParamVector entries lifted onto a tape as leaves, so gradients can be
// collected per named parameter.
struct TapedParams {
  std::map<std::string, Tensor> tensors;

  Tensor at(const std::string& name) const;
};
TapedParams lift(Tape& tape, const ParamVector& params);

// Forward pass recorded on the tape. Input is a constant (rows x in_dim).
Tensor mlp_forward(Tape& tape, const TapedParams& params, const Array& input,
                   const MlpSpec& spec);
// Forward pass continuing from an existing tape node.
Tensor mlp_forward(Tape& tape, const TapedParams& params, Tensor input, const MlpSpec& spec);

// Tape-free forward pass. Used wherever gradients must be structurally
// impossible (teacher inference, frozen guide features).
Array mlp_eval(const ParamVector& params, const Array& input, const MlpSpec& spec);

// Gradient of a scalar root w.r.t. every lifted parameter. Runs backward().
ParamVector grad(Tape& tape, Tensor root, const TapedParams& leaves);

}  // namespace camguide

#endif  // CAMGUIDE_MLP_HPP_
