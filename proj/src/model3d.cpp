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
#include "camguide/model3d.hpp"

namespace camguide {

MlpSpec Model3dSpec::trunk_spec() const {
  MlpSpec s;
  s.sizes.push_back(feature_dim);
  for (std::size_t h : trunk_hidden) s.sizes.push_back(h);
  s.sizes.push_back(trunk_out);
  s.prefix = "trunk.";
  return s;
}

MlpSpec Model3dSpec::cls_spec() const { return MlpSpec{{trunk_out, class_count}, "cls."}; }

MlpSpec Model3dSpec::aux_spec() const { return MlpSpec{{trunk_out, guide_dim}, "aux."}; }

ParamVector model3d_init(const Model3dSpec& spec, std::uint64_t seed) {
  ParamVector p = mlp_init(spec.trunk_spec(), seed);
  p.merge(mlp_init(spec.cls_spec(), seed + 1));
  p.merge(mlp_init(spec.aux_spec(), seed + 2));
  return p;
}

Prediction model3d_forward(Tape& tape, const TapedParams& params, const Array& features,
                           const Model3dSpec& spec) {
  Tensor trunk = tanh(mlp_forward(tape, params, features, spec.trunk_spec()));
  Tensor logits = mlp_forward(tape, params, trunk, spec.cls_spec());
  Tensor aux = mlp_forward(tape, params, trunk, spec.aux_spec());
  return {logits, aux};
}

EvalPrediction model3d_eval(const ParamVector& params, const Array& features,
                            const Model3dSpec& spec) {
  Array trunk = map_tanh(mlp_eval(params, features, spec.trunk_spec()));
  return {mlp_eval(params, trunk, spec.cls_spec()), mlp_eval(params, trunk, spec.aux_spec())};
}

}  // namespace camguide
