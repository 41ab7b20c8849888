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
#ifndef CAMGUIDE_TEACHER_HPP_
#define CAMGUIDE_TEACHER_HPP_

#include <cstdint>
#include <vector>

#include "camguide/model3d.hpp"
#include "camguide/params.hpp"

namespace camguide {

// Mean-teacher state: an exponential moving average shadow of the student
// weights, updated as shadow <- alpha * shadow + (1 - alpha) * student.
struct TeacherState {
  ParamVector shadow;
  double alpha = 0.999;
  std::uint64_t step = 0;
};

// The teacher starts as a copy of the student.
TeacherState make_teacher(const ParamVector& student, double alpha);

void ema_update(TeacherState& state, const ParamVector& student);

// Forward pass with the shadow weights, recorded on no tape: gradients can
// never flow into the teacher.
EvalPrediction teacher_predict(const TeacherState& state, const Array& features,
                               const Model3dSpec& spec);

// Per-row argmax of class logits; ties break toward the lowest index.
std::vector<int> assign_classes(const Array& logits);

}  // namespace camguide

#endif  // CAMGUIDE_TEACHER_HPP_
