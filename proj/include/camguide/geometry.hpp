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
#ifndef CAMGUIDE_GEOMETRY_HPP_
#define CAMGUIDE_GEOMETRY_HPP_

#include <array>
#include <cstdint>
#include <vector>

namespace camguide {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<double, 9>;  // row-major

Vec3 mat3_mul(const Mat3& m, const Vec3& v);
Mat3 mat3_mul(const Mat3& a, const Mat3& b);
Mat3 mat3_transpose(const Mat3& m);
Mat3 mat3_identity();
// Rotation about +z by `yaw` radians.
Mat3 yaw_rotation(double yaw);

// Pinhole camera: pixel = K [R|t] x_hom, with K in pixels and [R|t] the
// LiDAR-to-camera transform in meters.
struct CameraModel {
  Mat3 K = mat3_identity();
  Mat3 R = mat3_identity();
  Vec3 t = {0.0, 0.0, 0.0};
  std::uint32_t width = 0;
  std::uint32_t height = 0;

  // R orthonormal with det 1 (to 1e-9), positive focal entries.
  void validate() const;
};

struct PointCloud {
  // xyz triplets in meters, LiDAR frame.
  std::vector<double> xyz;

  std::size_t size() const { return xyz.size() / 3; }
  Vec3 point(std::size_t i) const { return {xyz[3 * i], xyz[3 * i + 1], xyz[3 * i + 2]}; }
  void push_back(const Vec3& p) {
    xyz.push_back(p[0]);
    xyz.push_back(p[1]);
    xyz.push_back(p[2]);
  }
};

// Per-point projection result. valid implies 0 <= k < width, 0 <= l < height
// and depth > 0.
struct Correspondence {
  std::vector<std::uint8_t> valid;
  std::vector<std::int32_t> k;  // column
  std::vector<std::int32_t> l;  // row
  std::vector<double> depth;

  std::size_t size() const { return valid.size(); }
};

// Depth below this is treated as degenerate and the point marked invalid.
constexpr double kMinProjectionDepth = 1e-9;

// k = floor(x0/x2), l = floor(x1/x2) from x = K (R p + t). A correspondence
// is valid iff depth >= kMinProjectionDepth and (k,l) lies in the half-open
// box [0,width) x [0,height).
Correspondence project(const PointCloud& points, const CameraModel& cam);

// Splits indices into (I, O): I = valid correspondences, O = the rest.
struct Partition {
  std::vector<int> in_image;   // I
  std::vector<int> out_image;  // O
};
Partition partition(const Correspondence& corr);

// mask[i] = 1 iff point i projects validly under (K/extent of `intr`,
// extrinsics of `extr`). Equivalent to project + valid flags but lets
// callers combine intrinsics and extrinsics from different cameras.
std::vector<std::uint8_t> fov_mask(const PointCloud& points, const CameraModel& intr,
                                   const Mat3& extr_R, const Vec3& extr_t);
std::vector<std::uint8_t> fov_mask(const PointCloud& points, const CameraModel& cam);

}  // namespace camguide

#endif  // CAMGUIDE_GEOMETRY_HPP_
