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
#ifndef CAMGUIDE_MODEL3D_HPP_
#define CAMGUIDE_MODEL3D_HPP_

#include <cstdint>
#include <vector>

#include "camguide/mlp.hpp"

namespace camguide {

// The 3D segmentation network: a per-point MLP trunk whose tanh-activated
// output feeds two linear heads, a C-way classifier and an auxiliary head
// of width `guide_dim` that is aligned with the 2D guide features.
struct Model3dSpec {
  std::size_t feature_dim = 6;
  std::vector<std::size_t> trunk_hidden = {32};
  std::size_t trunk_out = 32;
  std::size_t class_count = 4;
  std::size_t guide_dim = 16;

  MlpSpec trunk_spec() const;
  MlpSpec cls_spec() const;
  MlpSpec aux_spec() const;
};

ParamVector model3d_init(const Model3dSpec& spec, std::uint64_t seed);

// Student prediction, recorded on a tape. logits: N x C, aux: N x d.
struct Prediction {
  Tensor logits;
  Tensor aux;
};
Prediction model3d_forward(Tape& tape, const TapedParams& params, const Array& features,
                           const Model3dSpec& spec);

// Tape-free twin of model3d_forward.
struct EvalPrediction {
  Array logits;
  Array aux;
};
EvalPrediction model3d_eval(const ParamVector& params, const Array& features,
                            const Model3dSpec& spec);

}  // namespace camguide

#endif  // CAMGUIDE_MODEL3D_HPP_
