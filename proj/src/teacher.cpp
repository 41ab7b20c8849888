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
#include "camguide/teacher.hpp"

#include "camguide/error.hpp"

namespace camguide {

TeacherState make_teacher(const ParamVector& student, double alpha) {
  check(alpha >= 0.0 && alpha <= 1.0, ErrorCode::kConfig, "teacher: alpha must be in [0,1]");
  TeacherState s;
  s.shadow = student;
  s.alpha = alpha;
  s.step = 0;
  return s;
}

void ema_update(TeacherState& state, const ParamVector& student) {
  state.shadow.require_same_structure(student, "ema_update");
  // shadow = alpha * shadow + (1 - alpha) * student
  state.shadow.axpby(1.0 - state.alpha, student, state.alpha);
  ++state.step;
}

EvalPrediction teacher_predict(const TeacherState& state, const Array& features,
                               const Model3dSpec& spec) {
  return model3d_eval(state.shadow, features, spec);
}

std::vector<int> assign_classes(const Array& logits) { return argmax_rows(logits); }

}  // namespace camguide
