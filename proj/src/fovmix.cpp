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
#include "camguide/fovmix.hpp"

#include "camguide/error.hpp"
#include "camguide/rng.hpp"

namespace camguide {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void append_point(MixedSample& out, const Frame& src, std::size_t i, std::uint8_t prov) {
  out.frame.cloud.push_back(src.cloud.point(i));
  out.frame.labels.push_back(src.labels[i]);
  out.frame.weak_mask.push_back(src.weak_mask[i]);
  out.provenance.push_back(prov);
  out.src_index.push_back(static_cast<int>(i));
}

}  // namespace

MixedSample fovmix(const Frame& a, const Frame& b) {
  check(a.class_count == b.class_count, ErrorCode::kConfig,
        "fovmix: frames use different class vocabularies");
  MixedSample out;
  out.frame.cam = a.cam;
  out.frame.image = a.image;
  out.frame.dense_class = a.dense_class;
  out.frame.class_count = a.class_count;
  out.frame.frame_labeled = (a.frame_labeled || b.frame_labeled) ? 1 : 0;

  // M_AA on cloud A keeps A's in-FOV points; the cross mask M_AB (A's
  // intrinsics, B's extrinsics) evicts B's points from that region.
  std::vector<std::uint8_t> mask_a = fov_mask(a.cloud, a.cam);
  std::vector<std::uint8_t> mask_b = fov_mask(b.cloud, a.cam, b.cam.R, b.cam.t);

  for (std::size_t i = 0; i < a.point_count(); ++i) {
    if (mask_a[i]) append_point(out, a, i, 0);
  }
  out.empty_kept_a = out.frame.cloud.size() == 0;
  for (std::size_t i = 0; i < b.point_count(); ++i) {
    if (!mask_b[i]) append_point(out, b, i, 1);
  }
  return out;
}

Frame rotate_frame_yaw(const Frame& frame, double yaw) {
  Frame out = frame;
  Mat3 rot = yaw_rotation(yaw);
  for (std::size_t i = 0; i < frame.point_count(); ++i) {
    Vec3 p = mat3_mul(rot, frame.cloud.point(i));
    out.cloud.xyz[3 * i] = p[0];
    out.cloud.xyz[3 * i + 1] = p[1];
    out.cloud.xyz[3 * i + 2] = p[2];
  }
  // x_cam = R p + t stays fixed when R absorbs the inverse rotation.
  out.cam.R = mat3_mul(frame.cam.R, mat3_transpose(rot));
  return out;
}

std::vector<MixedSample> fovmix_batch(const std::vector<const Frame*>& frames, bool semi_mode,
                                      std::uint64_t seed, std::vector<double>* yaws_out) {
  check(!frames.empty(), ErrorCode::kConfig, "fovmix_batch: empty batch");
  std::vector<std::size_t> a_candidates;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (!semi_mode || frames[i]->frame_labeled) a_candidates.push_back(i);
  }
  check(!a_candidates.empty(), ErrorCode::kConfig,
        "fovmix_batch: semi mode requires at least one labeled frame");

  Rng yaw_rng = derive_rng(seed, {stream::kFovmixYaw});
  std::vector<Frame> rotated;
  std::vector<double> yaws;
  rotated.reserve(frames.size());
  for (const Frame* f : frames) {
    double yaw = yaw_rng.uniform(0.0, kTwoPi);
    yaws.push_back(yaw);
    rotated.push_back(rotate_frame_yaw(*f, yaw));
  }
  if (yaws_out) *yaws_out = yaws;

  Rng pair_rng = derive_rng(seed, {stream::kFovmixPair});
  std::vector<MixedSample> out;
  out.reserve(frames.size());
  for (std::size_t j = 0; j < frames.size(); ++j) {
    std::size_t ai = a_candidates[pair_rng.uniform_int(a_candidates.size())];
    MixedSample mixed = fovmix(rotated[ai], rotated[j]);
    mixed.a_frame = static_cast<int>(ai);
    mixed.b_frame = static_cast<int>(j);
    out.push_back(std::move(mixed));
  }
  return out;
}

}  // namespace camguide
