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
#ifndef CAMGUIDE_LOSSES3D_HPP_
#define CAMGUIDE_LOSSES3D_HPP_

#include <cstdint>
#include <vector>

#include "camguide/model3d.hpp"
#include "camguide/tape.hpp"

namespace camguide {

// Per-point targets gathered for the in-image set I: the frozen guide
// feature at each point's pixel, plus the teacher's class assignment for
// every point (in- and out-of-image alike).
struct GuidanceTargets {
  Array ig_features;               // |I| x d, no gradients ever
  std::vector<int> teacher_class;  // one entry per point
};

struct LossFlags {
  bool empty_in_image = false;        // ig_distill saw I = {}
  bool contrastive_skipped = false;   // every class had I^(c) or O^(c) empty
};

// Mean cross-entropy over weak-labeled points; 0 if none are labeled.
Tensor supervised_ce(const Prediction& pred, const std::vector<std::uint16_t>& labels,
                     const std::vector<std::uint8_t>& weak_mask);

// Mean KL(softmax(student) || softmax(teacher)) over unlabeled points.
// Teacher logits are plain arrays, so gradients flow to the student only.
Tensor mt_consistency(const Prediction& pred, const Array& teacher_logits,
                      const std::vector<std::uint8_t>& weak_mask);

// Mean KL(softmax(f_i) || softmax(f_IG,i)) over i in I, along the feature
// axis. Returns 0 and sets flags->empty_in_image when I is empty.
Tensor ig_distill(const Prediction& pred, const GuidanceTargets& guidance,
                  const std::vector<int>& in_image, LossFlags* flags);

// One-way supervised contrastive loss. For every class c (assigned by the
// teacher) and out-point o in O^(c):
//
//   -log( (1/|O^(c)|) sum_{i in I^(c)} exp(f_o . f_IG,i / tau)
//                     / sum_{i' in I} exp(f_o . f_IG,i' / tau) )
//
// summed over classes and out-points. Both feature sides are l2-normalized
// before the dot products; gradients reach the student features f_o only.
// Classes with empty I^(c) or O^(c) are skipped; if everything is skipped
// the loss is 0 and flags->contrastive_skipped is set.
Tensor one_way_contrastive(const Prediction& pred, const GuidanceTargets& guidance,
                           const std::vector<int>& in_image, const std::vector<int>& out_image,
                           double tau, LossFlags* flags);

struct LossTerms {
  Tensor supervised;
  Tensor consistency;
  Tensor ig;
  Tensor contrastive;
};

// supervised + consistency + ig + lambda * contrastive. Throws kNumeric
// naming the offending term if any value is non-finite.
Tensor total_loss(const LossTerms& terms, double lambda);

}  // namespace camguide

#endif  // CAMGUIDE_LOSSES3D_HPP_
