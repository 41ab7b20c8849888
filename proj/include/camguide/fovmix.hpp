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
#ifndef CAMGUIDE_FOVMIX_HPP_
#define CAMGUIDE_FOVMIX_HPP_

#include <cstdint>
#include <vector>

#include "camguide/datagen.hpp"

namespace camguide {

// Result of grafting sample A's image and in-FOV points onto sample B.
// The cloud is kept-A points followed by kept-B points; labels and weak
// masks travel with their points. src_index points back into the source
// frame's point list so per-point payloads can follow along.
struct MixedSample {
  Frame frame;                            // image and camera from A
  std::vector<std::uint8_t> provenance;   // 0 = from A, 1 = from B
  std::vector<int> src_index;
  int a_frame = -1, b_frame = -1;         // batch slots (set by fovmix_batch)
  bool empty_kept_a = false;              // flagged: starves the distillation loss
};

// kept-A = A-points inside A's camera FOV (mask under K_A, extrinsics A);
// kept-B = B-points outside the cross mask (K_A with B's extrinsics).
MixedSample fovmix(const Frame& a, const Frame& b);

// Rotates the cloud about +z and the camera extrinsics consistently, so
// point-pixel correspondences are preserved.
Frame rotate_frame_yaw(const Frame& frame, double yaw);

// One mixed sample per batch slot j, with B = frames[j] and A drawn
// randomly (from the labeled frames only when semi_mode is set). Every
// input frame first receives an independent random yaw rotation.
// yaws_out, if given, receives the per-slot rotation angles.
std::vector<MixedSample> fovmix_batch(const std::vector<const Frame*>& frames, bool semi_mode,
                                      std::uint64_t seed,
                                      std::vector<double>* yaws_out = nullptr);

}  // namespace camguide

#endif  // CAMGUIDE_FOVMIX_HPP_
