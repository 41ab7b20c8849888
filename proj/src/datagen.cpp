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
#include "camguide/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "camguide/error.hpp"
#include "camguide/io_util.hpp"
#include "camguide/metrics.hpp"
#include "camguide/rng.hpp"

namespace camguide {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMiss = std::numeric_limits<double>::infinity();

double deg2rad(double d) { return d * kPi / 180.0; }

// Entry parameter of a ray into a solid, or +inf. The ray origin is always
// outside every solid in these scenes, so the smallest positive boundary
// crossing is the entry.
double ray_entry(const Vec3& o, const Vec3& d, const Solid& s) {
  if (s.shape == ObjectClassCfg::Shape::kBox) {
    double cy = std::cos(-s.yaw), sy = std::sin(-s.yaw);
    double qx0 = o[0] - s.center[0], qy0 = o[1] - s.center[1];
    Vec3 q = {cy * qx0 - sy * qy0, sy * qx0 + cy * qy0, o[2] - s.center[2]};
    Vec3 e = {cy * d[0] - sy * d[1], sy * d[0] + cy * d[1], d[2]};
    double half[3] = {s.half_x, s.half_y, s.half_z};
    double tmin = 0.0, tmax = kMiss;
    for (int a = 0; a < 3; ++a) {
      if (std::fabs(e[a]) < 1e-12) {
        if (std::fabs(q[a]) > half[a]) return kMiss;
        continue;
      }
      double t1 = (-half[a] - q[a]) / e[a];
      double t2 = (half[a] - q[a]) / e[a];
      if (t1 > t2) std::swap(t1, t2);
      tmin = std::max(tmin, t1);
      tmax = std::min(tmax, t2);
      if (tmin > tmax) return kMiss;
    }
    return tmin > 1e-9 ? tmin : kMiss;
  }
  // Vertical cylinder: side surface plus caps; first positive crossing wins.
  double best = kMiss;
  double qx = o[0] - s.center[0], qy = o[1] - s.center[1];
  double a = d[0] * d[0] + d[1] * d[1];
  if (a > 1e-16) {
    double b = 2.0 * (qx * d[0] + qy * d[1]);
    double c = qx * qx + qy * qy - s.half_x * s.half_x;
    double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      double sq = std::sqrt(disc);
      for (double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
        if (t > 1e-9 && std::fabs(o[2] + t * d[2] - s.center[2]) <= s.half_z) {
          best = std::min(best, t);
        }
      }
    }
  }
  if (std::fabs(d[2]) > 1e-12) {
    for (double zcap : {s.center[2] - s.half_z, s.center[2] + s.half_z}) {
      double t = (zcap - o[2]) / d[2];
      if (t > 1e-9) {
        double hx = qx + t * d[0], hy = qy + t * d[1];
        if (hx * hx + hy * hy <= s.half_x * s.half_x) best = std::min(best, t);
      }
    }
  }
  return best;
}

struct Hit {
  double t = kMiss;
  std::uint16_t cls = 0;
  bool hit = false;
};

Hit first_hit(const Vec3& o, const Vec3& d, const std::vector<Solid>& solids, double ground_z,
              double max_range) {
  Hit h;
  if (d[2] < -1e-12) {
    double t = (ground_z - o[2]) / d[2];
    if (t > 1e-9 && t < h.t) {
      h.t = t;
      h.cls = 0;
      h.hit = true;
    }
  }
  for (const Solid& s : solids) {
    double t = ray_entry(o, d, s);
    if (t < h.t) {
      h.t = t;
      h.cls = s.cls;
      h.hit = true;
    }
  }
  if (h.t > max_range) h.hit = false;
  return h;
}

std::vector<Solid> sample_solids(Rng& rng, const SceneConfig& cfg, double ground_z) {
  std::vector<Solid> solids;
  for (std::size_t k = 0; k < cfg.objects.size(); ++k) {
    const ObjectClassCfg& oc = cfg.objects[k];
    std::uint64_t span = oc.max_count - oc.min_count + 1;
    std::uint64_t count = oc.min_count + rng.uniform_int(span);
    for (std::uint64_t i = 0; i < count; ++i) {
      for (int attempt = 0; attempt < 50; ++attempt) {
        Solid s;
        s.shape = oc.shape;
        s.cls = static_cast<std::uint16_t>(k + 1);
        double range = rng.uniform(cfg.min_object_range, cfg.max_object_range);
        double theta = rng.uniform(0.0, 2.0 * kPi);
        s.half_x = rng.uniform(oc.min_half_xy, oc.max_half_xy);
        s.half_y = (oc.shape == ObjectClassCfg::Shape::kBox)
                       ? rng.uniform(oc.min_half_xy, oc.max_half_xy)
                       : s.half_x;
        double height = rng.uniform(oc.min_height, oc.max_height);
        s.half_z = height / 2.0;
        s.yaw = rng.uniform(0.0, 2.0 * kPi);
        s.center = {range * std::cos(theta), range * std::sin(theta), ground_z + s.half_z};
        double rad = std::hypot(s.half_x, s.half_y);
        bool ok = true;
        for (const Solid& other : solids) {
          double orad = std::hypot(other.half_x, other.half_y);
          double dx = s.center[0] - other.center[0];
          double dy = s.center[1] - other.center[1];
          if (std::hypot(dx, dy) < rad + orad + 0.6) {
            ok = false;
            break;
          }
        }
        if (ok) {
          solids.push_back(s);
          break;
        }
      }
    }
  }
  return solids;
}

struct RenderColor {
  double r, g, b;
};

RenderColor base_color(std::uint16_t cls, bool sky) {
  if (sky) return {0.75, 0.82, 0.92};
  static const RenderColor palette[] = {
      {0.35, 0.30, 0.25},  // ground
      {0.85, 0.25, 0.20}, {0.20, 0.45, 0.85}, {0.25, 0.75, 0.30}, {0.85, 0.75, 0.20},
      {0.65, 0.30, 0.75}, {0.30, 0.75, 0.70}, {0.90, 0.55, 0.20},
  };
  return palette[cls % 8];
}

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

CameraModel make_camera(const SceneConfig& cfg) {
  CameraModel cam;
  cam.width = cfg.image_width;
  cam.height = cfg.image_height;
  double fx = (static_cast<double>(cfg.image_width) / 2.0) /
              std::tan(deg2rad(cfg.camera_hfov_deg) / 2.0);
  cam.K = {fx, 0.0, static_cast<double>(cfg.image_width) / 2.0,
           0.0, fx, static_cast<double>(cfg.image_height) / 2.0,
           0.0, 0.0, 1.0};
  // LiDAR frame: x forward, y left, z up. Camera frame: x right, y down,
  // z forward, looking along +x of the LiDAR.
  cam.R = {0.0, -1.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0};
  Vec3 center = {0.2, 0.0, -0.1};  // camera center in the LiDAR frame
  Vec3 rc = mat3_mul(cam.R, center);
  cam.t = {-rc[0], -rc[1], -rc[2]};
  return cam;
}

}  // namespace

void SceneConfig::validate() const {
  check(class_count >= 2, ErrorCode::kConfig, "scene: class_count must be at least 2");
  check(objects.size() == class_count - 1, ErrorCode::kConfig,
        "scene: need one object class config per non-ground class");
  check(camera_hfov_deg > 0.0 && camera_hfov_deg < 360.0, ErrorCode::kConfig,
        "scene: camera FOV must lie in (0, 360)");
  check(lidar_rings >= 2 && lidar_azimuth_steps >= 8, ErrorCode::kConfig,
        "scene: LiDAR resolution too coarse");
  check(lidar_max_range > min_object_range, ErrorCode::kConfig, "scene: max range too small");
  check(image_width >= 8 && image_height >= 8, ErrorCode::kConfig, "scene: image too small");
  for (const ObjectClassCfg& oc : objects) {
    check(oc.min_count <= oc.max_count && oc.min_half_xy <= oc.max_half_xy &&
              oc.min_height <= oc.max_height && oc.min_half_xy > 0.0,
          ErrorCode::kConfig, "scene: malformed object class config");
  }
}

std::vector<std::uint8_t> SceneConfig::small_class_flags() const {
  std::vector<std::uint8_t> flags(class_count, 0);
  for (std::size_t k = 0; k < objects.size(); ++k) {
    flags[k + 1] = (2.0 * objects[k].max_half_xy < 1.0) ? 1 : 0;
  }
  return flags;
}

SceneConfig SceneConfig::defaults(std::size_t class_count) {
  SceneConfig cfg;
  cfg.class_count = class_count;
  cfg.objects.clear();
  // Class 1: small boxes (crates); class 2: large boxes (vehicles);
  // class 3: tall thin cylinders (poles); further classes cycle.
  for (std::size_t k = 1; k < class_count; ++k) {
    ObjectClassCfg oc;
    switch ((k - 1) % 3) {
      case 0:
        oc.shape = ObjectClassCfg::Shape::kBox;
        oc.min_count = 3;
        oc.max_count = 6;
        oc.min_half_xy = 0.2;
        oc.max_half_xy = 0.42;
        oc.min_height = 0.5;
        oc.max_height = 0.9;
        break;
      case 1:
        oc.shape = ObjectClassCfg::Shape::kBox;
        oc.min_count = 2;
        oc.max_count = 4;
        oc.min_half_xy = 0.9;
        oc.max_half_xy = 1.8;
        oc.min_height = 1.5;
        oc.max_height = 2.2;
        break;
      default:
        oc.shape = ObjectClassCfg::Shape::kCylinder;
        oc.min_count = 3;
        oc.max_count = 6;
        oc.min_half_xy = 0.14;
        oc.max_half_xy = 0.30;
        oc.min_height = 2.8;
        oc.max_height = 4.5;
        break;
    }
    cfg.objects.push_back(oc);
  }
  return cfg;
}

Frame gen_scene(std::uint64_t seed, const SceneConfig& cfg) {
  return gen_scene(seed, cfg, nullptr);
}

Frame gen_scene(std::uint64_t seed, const SceneConfig& cfg, std::vector<Solid>* solids_out) {
  cfg.validate();
  double ground_z = -cfg.sensor_height;
  Rng geo = derive_rng(seed, {10});
  std::vector<Solid> solids = sample_solids(geo, cfg, ground_z);
  if (solids_out) *solids_out = solids;

  Frame frame;
  frame.class_count = static_cast<std::uint32_t>(cfg.class_count);
  frame.cam = make_camera(cfg);

  // LiDAR sweep, ring-major. Ray directions are exact; range noise moves the
  // sample along the ray, so per-point labels stay exact.
  Rng noise = derive_rng(seed, {11});
  Vec3 origin = {0.0, 0.0, 0.0};
  for (std::size_t ring = 0; ring < cfg.lidar_rings; ++ring) {
    double frac = cfg.lidar_rings == 1
                      ? 0.0
                      : static_cast<double>(ring) / static_cast<double>(cfg.lidar_rings - 1);
    double elev = deg2rad(cfg.min_elevation_deg +
                          frac * (cfg.max_elevation_deg - cfg.min_elevation_deg));
    double ce = std::cos(elev), se = std::sin(elev);
    for (std::size_t step = 0; step < cfg.lidar_azimuth_steps; ++step) {
      double theta = 2.0 * kPi * (static_cast<double>(step) + 0.5) /
                     static_cast<double>(cfg.lidar_azimuth_steps);
      Vec3 d = {ce * std::cos(theta), ce * std::sin(theta), se};
      Hit h = first_hit(origin, d, solids, ground_z, cfg.lidar_max_range);
      double jitter = noise.uniform(-cfg.range_noise, cfg.range_noise);
      if (!h.hit) continue;
      double t = std::max(h.t + jitter, 0.05);
      frame.cloud.push_back({t * d[0], t * d[1], t * d[2]});
      frame.labels.push_back(h.cls);
    }
  }
  frame.weak_mask.assign(frame.labels.size(), 1);
  frame.frame_labeled = 1;

  // Camera rendering of the same scene. Separate color stream per domain;
  // the class map depends only on geometry, so both domains share it.
  std::uint32_t W = cfg.image_width, H = cfg.image_height;
  frame.image = Array({H, W, 3});
  frame.dense_class.assign(static_cast<std::size_t>(W) * H, 0);
  Rng color = derive_rng(seed, {12, static_cast<std::uint64_t>(cfg.domain)});
  Mat3 rt = mat3_transpose(frame.cam.R);
  Vec3 cam_center = {0.2, 0.0, -0.1};
  double fx = frame.cam.K[0], fy = frame.cam.K[4], cx = frame.cam.K[2], cy = frame.cam.K[5];
  for (std::uint32_t v = 0; v < H; ++v) {
    for (std::uint32_t u = 0; u < W; ++u) {
      Vec3 d_cam = {((static_cast<double>(u) + 0.5) - cx) / fx,
                    ((static_cast<double>(v) + 0.5) - cy) / fy, 1.0};
      double nrm = std::sqrt(d_cam[0] * d_cam[0] + d_cam[1] * d_cam[1] + d_cam[2] * d_cam[2]);
      Vec3 d_unit = {d_cam[0] / nrm, d_cam[1] / nrm, d_cam[2] / nrm};
      Vec3 d = mat3_mul(rt, d_unit);
      Hit h = first_hit(cam_center, d, solids, ground_z, cfg.lidar_max_range);
      bool sky = !h.hit;
      std::uint16_t cls = sky ? 0 : h.cls;
      frame.dense_class[v * W + u] = cls;
      RenderColor base = base_color(cls, sky);
      double shade = sky ? 1.0 : clamp01(1.15 - h.t / 50.0);
      shade = std::max(shade, 0.35);
      double rgb[3] = {base.r * shade, base.g * shade, base.b * shade};
      if (cfg.domain == Domain::kSource) {
        // Fixed invertible channel remix plus bias: the synthetic-source look.
        double r2 = 0.62 * rgb[0] + 0.26 * rgb[1] + 0.12 * rgb[2] + 0.08;
        double g2 = 0.10 * rgb[0] + 0.72 * rgb[1] + 0.18 * rgb[2] + 0.03;
        double b2 = 0.16 * rgb[0] + 0.20 * rgb[1] + 0.64 * rgb[2] - 0.02;
        rgb[0] = r2;
        rgb[1] = g2;
        rgb[2] = b2;
      }
      for (int c = 0; c < 3; ++c) {
        frame.image[(static_cast<std::size_t>(v) * W + u) * 3 + c] =
            clamp01(rgb[c] + color.uniform(-cfg.color_noise, cfg.color_noise));
      }
    }
  }
  return frame;
}

Frame scribble_sim(const Frame& frame, double budget, std::uint64_t seed, double* attained) {
  check(budget > 0.0 && budget < 1.0, ErrorCode::kConfig,
        "scribble_sim: budget must lie in (0, 1)");
  Frame out = frame;
  std::size_t n = frame.point_count();
  out.weak_mask.assign(n, 0);
  out.frame_labeled = 1;
  if (n == 0) {
    if (attained) *attained = 0.0;
    return out;
  }
  std::vector<std::uint8_t> border = border_split(frame.cloud, frame.labels);

  // Runs of consecutive eligible same-class points. Consecutive emitted
  // points on one object along a scan line sit well under 1 m apart, so a
  // distance break also separates rings and occlusion gaps.
  struct Run {
    std::size_t begin, end;  // half-open
  };
  std::vector<Run> runs;
  std::size_t i = 0;
  while (i < n) {
    if (border[i]) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < n && !border[j] && frame.labels[j] == frame.labels[i]) {
      Vec3 a = frame.cloud.point(j - 1), b = frame.cloud.point(j);
      double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
      if (dx * dx + dy * dy + dz * dz >= 1.0) break;
      ++j;
    }
    runs.push_back({i, j});
    i = j;
  }

  std::size_t target = static_cast<std::size_t>(std::llround(budget * static_cast<double>(n)));
  std::size_t eligible = 0;
  for (const Run& r : runs) eligible += r.end - r.begin;

  if (eligible <= target) {
    for (const Run& r : runs) {
      for (std::size_t k = r.begin; k < r.end; ++k) out.weak_mask[k] = 1;
    }
    if (attained) *attained = static_cast<double>(eligible) / static_cast<double>(n);
    return out;
  }

  std::vector<std::size_t> order(runs.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  Rng rng = derive_rng(seed, {20});
  rng.shuffle(order);
  std::size_t selected = 0;
  for (std::size_t k : order) {
    if (selected >= target) break;
    const Run& r = runs[k];
    std::size_t take = std::min(r.end - r.begin, target - selected);
    for (std::size_t p = r.begin; p < r.begin + take; ++p) out.weak_mask[p] = 1;
    selected += take;
  }
  if (attained) *attained = static_cast<double>(selected) / static_cast<double>(n);
  return out;
}

std::vector<std::uint8_t> sample_frames(std::size_t count, double rate, std::uint64_t seed) {
  check(rate > 0.0 && rate <= 1.0, ErrorCode::kConfig, "sample_frames: rate must be in (0, 1]");
  (void)seed;  // spacing is uniform and deterministic; kept for interface stability
  std::vector<std::uint8_t> flags(count, 0);
  std::size_t labeled = static_cast<std::size_t>(
      std::ceil(rate * static_cast<double>(count) - 1e-12));
  if (labeled == 0) labeled = 1;
  for (std::size_t j = 0; j < labeled && j < count; ++j) {
    std::size_t idx = (j * count) / labeled;
    flags[idx] = 1;
  }
  return flags;
}

void write_frame(std::ostream& os, const Frame& frame) {
  std::size_t n = frame.point_count();
  check(frame.labels.size() == n && frame.weak_mask.size() == n, ErrorCode::kInternal,
        "write_frame: per-point channel lengths disagree");
  std::uint32_t H = frame.cam.height, W = frame.cam.width;
  check(frame.image.rank() == 3 && frame.image.dim(0) == H && frame.image.dim(1) == W &&
            frame.image.dim(2) == 3,
        ErrorCode::kInternal, "write_frame: image extent mismatch");
  check(frame.dense_class.size() == static_cast<std::size_t>(H) * W, ErrorCode::kInternal,
        "write_frame: class map extent mismatch");
  os.write("FDF1", 4);
  io::write_u32(os, static_cast<std::uint32_t>(n));
  io::write_u32(os, H);
  io::write_u32(os, W);
  io::write_u32(os, frame.class_count);
  for (double v : frame.cam.K) io::write_f64(os, v);
  for (double v : frame.cam.R) io::write_f64(os, v);
  for (double v : frame.cam.t) io::write_f64(os, v);
  for (double v : frame.cloud.xyz) io::write_f64(os, v);
  for (std::uint16_t v : frame.labels) io::write_u16(os, v);
  for (std::uint8_t v : frame.weak_mask) io::write_u8(os, v);
  io::write_u8(os, frame.frame_labeled);
  for (std::size_t idx = 0; idx < frame.image.size(); ++idx) io::write_f64(os, frame.image[idx]);
  for (std::uint16_t v : frame.dense_class) io::write_u16(os, v);
  check(os.good(), ErrorCode::kIo, "frame write failed");
}

Frame read_frame(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  check(is.good() && std::memcmp(magic, "FDF1", 4) == 0, ErrorCode::kIo,
        "not a frame file (bad magic)");
  Frame frame;
  std::uint32_t n = io::read_u32(is);
  std::uint32_t H = io::read_u32(is);
  std::uint32_t W = io::read_u32(is);
  frame.class_count = io::read_u32(is);
  for (double& v : frame.cam.K) v = io::read_f64(is);
  for (double& v : frame.cam.R) v = io::read_f64(is);
  for (double& v : frame.cam.t) v = io::read_f64(is);
  frame.cam.width = W;
  frame.cam.height = H;
  frame.cloud.xyz.resize(static_cast<std::size_t>(n) * 3);
  for (double& v : frame.cloud.xyz) v = io::read_f64(is);
  frame.labels.resize(n);
  for (std::uint16_t& v : frame.labels) v = io::read_u16(is);
  frame.weak_mask.resize(n);
  for (std::uint8_t& v : frame.weak_mask) v = io::read_u8(is);
  frame.frame_labeled = io::read_u8(is);
  frame.image = Array({H, W, 3});
  for (std::size_t idx = 0; idx < frame.image.size(); ++idx) frame.image[idx] = io::read_f64(is);
  frame.dense_class.resize(static_cast<std::size_t>(H) * W);
  for (std::uint16_t& v : frame.dense_class) v = io::read_u16(is);
  check(is.good(), ErrorCode::kIo, "frame file truncated");
  return frame;
}

void save_frame(const std::string& path, const Frame& frame) {
  std::ofstream os(path, std::ios::binary);
  check(os.is_open(), ErrorCode::kIo, "cannot open '" + path + "' for writing");
  write_frame(os, frame);
}

Frame load_frame(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  check(is.is_open(), ErrorCode::kIo, "cannot open '" + path + "'");
  return read_frame(is);
}

}  // namespace camguide
