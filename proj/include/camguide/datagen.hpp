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
#ifndef CAMGUIDE_DATAGEN_HPP_
#define CAMGUIDE_DATAGEN_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "camguide/array.hpp"
#include "camguide/geometry.hpp"

namespace camguide {

enum class Domain : std::uint8_t { kSource = 0, kTarget = 1 };

struct ObjectClassCfg {
  enum class Shape : std::uint8_t { kBox, kCylinder };
  Shape shape = Shape::kBox;
  std::uint32_t min_count = 2, max_count = 5;
  double min_half_xy = 0.3, max_half_xy = 0.6;  // half-extent (box) or radius (cylinder)
  double min_height = 0.6, max_height = 1.2;
};

struct SceneConfig {
  std::size_t class_count = 4;  // ground plus the object classes below
  std::vector<ObjectClassCfg> objects;

  std::size_t lidar_rings = 18;
  std::size_t lidar_azimuth_steps = 300;
  double min_elevation_deg = -22.0;
  double max_elevation_deg = 5.0;
  double lidar_max_range = 40.0;
  double sensor_height = 1.6;
  double range_noise = 0.02;  // uniform in [-range_noise, +range_noise], along the ray

  double camera_hfov_deg = 90.0;
  std::uint32_t image_width = 48;
  std::uint32_t image_height = 32;
  double color_noise = 0.02;

  double min_object_range = 4.0;
  double max_object_range = 30.0;

  Domain domain = Domain::kTarget;

  void validate() const;
  // Object classes whose horizontal extent stays under 1 m count as small.
  std::vector<std::uint8_t> small_class_flags() const;
  static SceneConfig defaults(std::size_t class_count = 4);
};

struct Frame {
  PointCloud cloud;
  CameraModel cam;
  Array image;                            // {H, W, 3}, values in [0, 1]
  std::vector<std::uint16_t> dense_class; // H*W, row-major
  std::vector<std::uint16_t> labels;      // per point
  std::vector<std::uint8_t> weak_mask;    // per point, 1 = labeled
  std::uint8_t frame_labeled = 1;
  std::uint32_t class_count = 0;

  std::size_t point_count() const { return cloud.size(); }
};

// Scene solids kept around for oracle-style membership checks in tests.
struct Solid {
  ObjectClassCfg::Shape shape;
  Vec3 center{};   // z at the solid's vertical mid-height
  double yaw = 0.0;
  double half_x = 0.0, half_y = 0.0, half_z = 0.0;  // half_x doubles as radius
  std::uint16_t cls = 0;
};

// Deterministic in (seed, cfg). Geometry and LiDAR sampling are shared
// between domains; only the image rendering differs, so a source/target
// pair generated from the same seed shares its dense class map.
Frame gen_scene(std::uint64_t seed, const SceneConfig& cfg);
Frame gen_scene(std::uint64_t seed, const SceneConfig& cfg, std::vector<Solid>* solids_out);

// Scribble weak labels: roughly budget*N points, selected as contiguous
// same-class runs along the simulated scan lines, never on border points
// (16-neighbor rule). If the budget exceeds the non-border supply, all
// non-border points are labeled; *attained always reports the achieved
// fraction.
Frame scribble_sim(const Frame& frame, double budget, std::uint64_t seed,
                   double* attained = nullptr);

// ceil(rate*count) frames flagged labeled, uniformly spaced.
std::vector<std::uint8_t> sample_frames(std::size_t count, double rate, std::uint64_t seed);

// Frame binary format (little-endian): magic "FDF1"; u32 N, H, W, C;
// 9 f64 K; 9 f64 R; 3 f64 t; N*3 f64 xyz; N u16 labels; N u8 weakMask;
// u8 frameLabeled; H*W*3 f64 raw channels; H*W u16 dense class map.
void write_frame(std::ostream& os, const Frame& frame);
Frame read_frame(std::istream& is);
void save_frame(const std::string& path, const Frame& frame);
Frame load_frame(const std::string& path);

}  // namespace camguide

#endif  // CAMGUIDE_DATAGEN_HPP_
