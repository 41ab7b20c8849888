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
#ifndef CAMGUIDE_METRICS_HPP_
#define CAMGUIDE_METRICS_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "camguide/geometry.hpp"

namespace camguide {

// Number of nearest neighbors consulted by the border rule.
constexpr std::size_t kBorderNeighbors = 16;
// Near/far boundary in meters of horizontal range; exactly 25 m is far.
constexpr double kRangeSplitMeters = 25.0;

struct EvalReport {
  std::size_t class_count = 0;
  std::vector<std::uint64_t> confusion;  // C x C, row = true class, col = predicted
  std::vector<double> per_class_iou;
  double miou = 0.0;
  double rel_miou = -1.0;  // vs fully supervised reference; negative = not supplied

  double overall_acc = 0.0;
  double border_acc = 0.0, non_border_acc = 0.0;
  double small_obj_acc = 0.0, large_obj_acc = 0.0;
  double near_acc = 0.0, far_acc = 0.0;

  std::uint64_t total_points = 0;
  std::uint64_t border_points = 0, non_border_points = 0;
  std::uint64_t small_obj_points = 0, large_obj_points = 0;
  std::uint64_t near_points = 0, far_points = 0;
};

// IoU_c = TP / (TP + FP + FN); classes absent from both ground truth and
// predictions are excluded from the mean.
struct IouSummary {
  std::vector<double> per_class_iou;
  double miou = 0.0;
};
IouSummary iou_from_confusion(const std::vector<std::uint64_t>& confusion,
                              std::size_t class_count);

// flag[i] = 1 iff any of the 16 Euclidean-nearest neighbors of point i has
// a different true label. Distance ties break toward the lower point index.
// Requires at least 17 points.
std::vector<std::uint8_t> border_split(const PointCloud& cloud,
                                       const std::vector<std::uint16_t>& labels);

// flag[i] = 1 iff the point's horizontal range is under 25 m.
std::vector<std::uint8_t> range_split(const PointCloud& cloud);

// Streaming evaluation over frames. small_class[c] marks object classes
// counted as "small"; class 0 (ground) belongs to neither object bucket.
class EvalAccumulator {
 public:
  EvalAccumulator(std::size_t class_count, std::vector<std::uint8_t> small_class);

  void add_frame(const PointCloud& cloud, const std::vector<std::uint16_t>& truth,
                 const std::vector<int>& pred);
  // Same, with precomputed border flags (avoids the O(N^2) neighbor pass).
  void add_frame(const PointCloud& cloud, const std::vector<std::uint16_t>& truth,
                 const std::vector<int>& pred, const std::vector<std::uint8_t>& border);

  EvalReport finish(double reference_miou = -1.0) const;

 private:
  std::size_t class_count_;
  std::vector<std::uint8_t> small_class_;
  std::vector<std::uint64_t> confusion_;
  std::uint64_t hit_[8] = {0};  // paired (correct, total) buckets
  std::uint64_t tot_[8] = {0};
};

void write_report_text(std::ostream& os, const EvalReport& report);
void write_report_kv(std::ostream& os, const EvalReport& report);
// Bird's-eye-view raster, truth on the left, prediction on the right,
// written as a binary portable pixmap (P6).
void write_bev_ppm(const std::string& path, const PointCloud& cloud,
                   const std::vector<std::uint16_t>& truth, const std::vector<int>& pred,
                   double extent_meters = 40.0, std::size_t pixels_per_side = 200);

}  // namespace camguide

#endif  // CAMGUIDE_METRICS_HPP_
