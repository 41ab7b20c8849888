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
#include "camguide/geometry.hpp"

#include <cmath>

#include "camguide/error.hpp"

namespace camguide {

Vec3 mat3_mul(const Mat3& m, const Vec3& v) {
  return {m[0] * v[0] + m[1] * v[1] + m[2] * v[2],
          m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
          m[6] * v[0] + m[7] * v[1] + m[8] * v[2]};
}

Mat3 mat3_mul(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a[3 * i + k] * b[3 * k + j];
      c[3 * i + j] = s;
    }
  }
  return c;
}

Mat3 mat3_transpose(const Mat3& m) {
  return {m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]};
}

Mat3 mat3_identity() { return {1, 0, 0, 0, 1, 0, 0, 0, 1}; }

Mat3 yaw_rotation(double yaw) {
  double c = std::cos(yaw);
  double s = std::sin(yaw);
  return {c, -s, 0, s, c, 0, 0, 0, 1};
}

void CameraModel::validate() const {
  check(width > 0 && height > 0, ErrorCode::kConfig, "camera: image extent must be positive");
  check(K[0] > 0.0 && K[4] > 0.0, ErrorCode::kConfig, "camera: focal entries must be positive");
  // R^T R == I and det(R) == 1, both to 1e-9.
  Mat3 g = mat3_mul(mat3_transpose(R), R);
  Mat3 id = mat3_identity();
  for (int i = 0; i < 9; ++i) {
    check(std::fabs(g[i] - id[i]) <= 1e-9, ErrorCode::kConfig, "camera: R is not orthonormal");
  }
  double det = R[0] * (R[4] * R[8] - R[5] * R[7]) - R[1] * (R[3] * R[8] - R[5] * R[6]) +
               R[2] * (R[3] * R[7] - R[4] * R[6]);
  check(std::fabs(det - 1.0) <= 1e-9, ErrorCode::kConfig, "camera: det(R) != 1");
}

namespace {

inline void project_one(const Mat3& KR, const Vec3& Kt, double width, double height,
                        const Vec3& p, std::uint8_t& valid, std::int32_t& k, std::int32_t& l,
                        double& depth) {
  // x_rec = K (R p + t) folded as (K R) p + K t.
  double x0 = KR[0] * p[0] + KR[1] * p[1] + KR[2] * p[2] + Kt[0];
  double x1 = KR[3] * p[0] + KR[4] * p[1] + KR[5] * p[2] + Kt[1];
  double x2 = KR[6] * p[0] + KR[7] * p[1] + KR[8] * p[2] + Kt[2];
  depth = x2;
  if (!(x2 >= kMinProjectionDepth)) {
    valid = 0;
    k = 0;
    l = 0;
    return;
  }
  double kf = std::floor(x0 / x2);
  double lf = std::floor(x1 / x2);
  k = static_cast<std::int32_t>(kf);
  l = static_cast<std::int32_t>(lf);
  valid = (kf >= 0.0 && kf < width && lf >= 0.0 && lf < height) ? 1 : 0;
}

}  // namespace

Correspondence project(const PointCloud& points, const CameraModel& cam) {
  cam.validate();
  std::size_t n = points.size();
  Correspondence corr;
  corr.valid.resize(n);
  corr.k.resize(n);
  corr.l.resize(n);
  corr.depth.resize(n);
  Mat3 KR = mat3_mul(cam.K, cam.R);
  Vec3 Kt = mat3_mul(cam.K, cam.t);
  double w = static_cast<double>(cam.width);
  double h = static_cast<double>(cam.height);
  for (std::size_t i = 0; i < n; ++i) {
    project_one(KR, Kt, w, h, points.point(i), corr.valid[i], corr.k[i], corr.l[i],
                corr.depth[i]);
  }
  return corr;
}

Partition partition(const Correspondence& corr) {
  Partition p;
  for (std::size_t i = 0; i < corr.size(); ++i) {
    if (corr.valid[i]) {
      p.in_image.push_back(static_cast<int>(i));
    } else {
      p.out_image.push_back(static_cast<int>(i));
    }
  }
  return p;
}

std::vector<std::uint8_t> fov_mask(const PointCloud& points, const CameraModel& intr,
                                   const Mat3& extr_R, const Vec3& extr_t) {
  CameraModel cam = intr;
  cam.R = extr_R;
  cam.t = extr_t;
  return project(points, cam).valid;
}

std::vector<std::uint8_t> fov_mask(const PointCloud& points, const CameraModel& cam) {
  return project(points, cam).valid;
}

}  // namespace camguide
