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
#include "camguide/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "camguide/error.hpp"

namespace camguide {
namespace {

enum Bucket { kBorder = 0, kNonBorder, kSmallObj, kLargeObj, kNear, kFar, kAll, kBucketCount };

double rate(std::uint64_t hit, std::uint64_t tot) {
  return tot == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(tot);
}

}  // namespace

IouSummary iou_from_confusion(const std::vector<std::uint64_t>& confusion,
                              std::size_t class_count) {
  check(confusion.size() == class_count * class_count, ErrorCode::kInternal,
        "iou_from_confusion: bad confusion size");
  IouSummary out;
  out.per_class_iou.assign(class_count, 0.0);
  double acc = 0.0;
  std::size_t counted = 0;
  for (std::size_t c = 0; c < class_count; ++c) {
    std::uint64_t tp = confusion[c * class_count + c];
    std::uint64_t fn = 0, fp = 0;
    for (std::size_t j = 0; j < class_count; ++j) {
      if (j != c) {
        fn += confusion[c * class_count + j];
        fp += confusion[j * class_count + c];
      }
    }
    std::uint64_t denom = tp + fp + fn;
    if (denom == 0) continue;  // absent from both truth and predictions
    out.per_class_iou[c] = static_cast<double>(tp) / static_cast<double>(denom);
    acc += out.per_class_iou[c];
    ++counted;
  }
  out.miou = counted == 0 ? 0.0 : acc / static_cast<double>(counted);
  return out;
}

std::vector<std::uint8_t> border_split(const PointCloud& cloud,
                                       const std::vector<std::uint16_t>& labels) {
  std::size_t n = cloud.size();
  check(n == labels.size(), ErrorCode::kInternal, "border_split: label count mismatch");
  check(n >= kBorderNeighbors + 1, ErrorCode::kConfig,
        "border_split: need at least 17 points");
  std::vector<std::uint8_t> border(n, 0);
  std::vector<std::pair<double, std::uint32_t>> cand(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 pi = cloud.point(i);
    std::size_t w = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      Vec3 pj = cloud.point(j);
      double dx = pi[0] - pj[0], dy = pi[1] - pj[1], dz = pi[2] - pj[2];
      cand[w++] = {dx * dx + dy * dy + dz * dz, static_cast<std::uint32_t>(j)};
    }
    std::nth_element(cand.begin(), cand.begin() + (kBorderNeighbors - 1), cand.end());
    // nth_element on (distance, index) pairs: the comparison is lexicographic,
    // so equal distances resolve toward the lower point index.
    for (std::size_t k = 0; k < kBorderNeighbors; ++k) {
      if (labels[cand[k].second] != labels[i]) {
        border[i] = 1;
        break;
      }
    }
  }
  return border;
}

std::vector<std::uint8_t> range_split(const PointCloud& cloud) {
  std::size_t n = cloud.size();
  std::vector<std::uint8_t> near(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 p = cloud.point(i);
    near[i] = std::hypot(p[0], p[1]) < kRangeSplitMeters ? 1 : 0;
  }
  return near;
}

EvalAccumulator::EvalAccumulator(std::size_t class_count, std::vector<std::uint8_t> small_class)
    : class_count_(class_count),
      small_class_(std::move(small_class)),
      confusion_(class_count * class_count, 0) {
  check(class_count_ >= 2, ErrorCode::kConfig, "eval: need at least two classes");
  check(small_class_.size() == class_count_, ErrorCode::kInternal,
        "eval: small_class flag per class required");
}

void EvalAccumulator::add_frame(const PointCloud& cloud,
                                const std::vector<std::uint16_t>& truth,
                                const std::vector<int>& pred) {
  add_frame(cloud, truth, pred, border_split(cloud, truth));
}

void EvalAccumulator::add_frame(const PointCloud& cloud,
                                const std::vector<std::uint16_t>& truth,
                                const std::vector<int>& pred,
                                const std::vector<std::uint8_t>& border) {
  std::size_t n = cloud.size();
  check(truth.size() == n && pred.size() == n && border.size() == n, ErrorCode::kInternal,
        "eval: per-point input lengths disagree");
  std::vector<std::uint8_t> near = range_split(cloud);
  for (std::size_t i = 0; i < n; ++i) {
    check(truth[i] < class_count_ && pred[i] >= 0 &&
              static_cast<std::size_t>(pred[i]) < class_count_,
          ErrorCode::kInternal, "eval: class id out of range");
    confusion_[truth[i] * class_count_ + static_cast<std::size_t>(pred[i])]++;
    bool correct = static_cast<std::size_t>(pred[i]) == truth[i];
    auto bump = [&](Bucket b) {
      tot_[b]++;
      if (correct) hit_[b]++;
    };
    bump(kAll);
    bump(border[i] ? kBorder : kNonBorder);
    bump(near[i] ? kNear : kFar);
    if (truth[i] != 0) bump(small_class_[truth[i]] ? kSmallObj : kLargeObj);
  }
}

EvalReport EvalAccumulator::finish(double reference_miou) const {
  EvalReport r;
  r.class_count = class_count_;
  r.confusion = confusion_;
  IouSummary iou = iou_from_confusion(confusion_, class_count_);
  r.per_class_iou = iou.per_class_iou;
  r.miou = iou.miou;
  if (reference_miou > 0.0) r.rel_miou = r.miou / reference_miou;
  r.overall_acc = rate(hit_[kAll], tot_[kAll]);
  r.border_acc = rate(hit_[kBorder], tot_[kBorder]);
  r.non_border_acc = rate(hit_[kNonBorder], tot_[kNonBorder]);
  r.small_obj_acc = rate(hit_[kSmallObj], tot_[kSmallObj]);
  r.large_obj_acc = rate(hit_[kLargeObj], tot_[kLargeObj]);
  r.near_acc = rate(hit_[kNear], tot_[kNear]);
  r.far_acc = rate(hit_[kFar], tot_[kFar]);
  r.total_points = tot_[kAll];
  r.border_points = tot_[kBorder];
  r.non_border_points = tot_[kNonBorder];
  r.small_obj_points = tot_[kSmallObj];
  r.large_obj_points = tot_[kLargeObj];
  r.near_points = tot_[kNear];
  r.far_points = tot_[kFar];
  return r;
}

namespace {

void put_line(std::ostream& os, const char* fmt, ...) {
  char buf[256];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  os << buf << "\n";
}

}  // namespace

void write_report_text(std::ostream& os, const EvalReport& r) {
  put_line(os, "%-22s %10.4f", "mIoU", r.miou);
  if (r.rel_miou >= 0.0) put_line(os, "%-22s %9.2f%%", "rel mIoU", 100.0 * r.rel_miou);
  for (std::size_t c = 0; c < r.class_count; ++c) {
    put_line(os, "IoU[class %zu]          %10.4f", c, r.per_class_iou[c]);
  }
  put_line(os, "%-22s %10.4f", "overall acc", r.overall_acc);
  put_line(os, "%-22s %10.4f  (n=%llu)", "border acc", r.border_acc,
           static_cast<unsigned long long>(r.border_points));
  put_line(os, "%-22s %10.4f  (n=%llu)", "non-border acc", r.non_border_acc,
           static_cast<unsigned long long>(r.non_border_points));
  put_line(os, "%-22s %10.4f  (n=%llu)", "small-object acc", r.small_obj_acc,
           static_cast<unsigned long long>(r.small_obj_points));
  put_line(os, "%-22s %10.4f  (n=%llu)", "large-object acc", r.large_obj_acc,
           static_cast<unsigned long long>(r.large_obj_points));
  put_line(os, "%-22s %10.4f  (n=%llu)", "near acc (0-25m)", r.near_acc,
           static_cast<unsigned long long>(r.near_points));
  put_line(os, "%-22s %10.4f  (n=%llu)", "far acc (25m+)", r.far_acc,
           static_cast<unsigned long long>(r.far_points));
  os << "confusion (rows = truth):\n";
  for (std::size_t i = 0; i < r.class_count; ++i) {
    for (std::size_t j = 0; j < r.class_count; ++j) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), " %10llu",
                    static_cast<unsigned long long>(r.confusion[i * r.class_count + j]));
      os << buf;
    }
    os << "\n";
  }
}

void write_report_kv(std::ostream& os, const EvalReport& r) {
  auto kv = [&os](const char* key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << key << " = " << buf << "\n";
  };
  kv("miou", r.miou);
  if (r.rel_miou >= 0.0) kv("rel_miou", r.rel_miou);
  for (std::size_t c = 0; c < r.class_count; ++c) {
    std::string key = "iou_class_" + std::to_string(c);
    kv(key.c_str(), r.per_class_iou[c]);
  }
  kv("overall_acc", r.overall_acc);
  kv("border_acc", r.border_acc);
  kv("non_border_acc", r.non_border_acc);
  kv("small_obj_acc", r.small_obj_acc);
  kv("large_obj_acc", r.large_obj_acc);
  kv("near_acc", r.near_acc);
  kv("far_acc", r.far_acc);
  os << "total_points = " << r.total_points << "\n";
  os << "border_points = " << r.border_points << "\n";
  os << "near_points = " << r.near_points << "\n";
  for (std::size_t i = 0; i < r.class_count; ++i) {
    for (std::size_t j = 0; j < r.class_count; ++j) {
      os << "confusion_" << i << "_" << j << " = " << r.confusion[i * r.class_count + j]
         << "\n";
    }
  }
}

namespace {

struct Rgb {
  unsigned char r, g, b;
};

Rgb class_color(int c) {
  static const Rgb palette[] = {
      {120, 110, 90},  // ground
      {230, 80, 80},   {80, 160, 230}, {90, 200, 90},  {230, 200, 70},
      {180, 90, 200},  {90, 210, 200}, {240, 140, 60},
  };
  return palette[c % 8];
}

}  // namespace

void write_bev_ppm(const std::string& path, const PointCloud& cloud,
                   const std::vector<std::uint16_t>& truth, const std::vector<int>& pred,
                   double extent_meters, std::size_t pixels_per_side) {
  std::size_t s = pixels_per_side;
  std::size_t width = 2 * s + 1;
  std::vector<Rgb> img(width * s, {24, 24, 24});
  for (std::size_t row = 0; row < s; ++row) img[row * width + s] = {255, 255, 255};
  auto splat = [&](double x, double y, std::size_t panel, Rgb color) {
    double u = (x + extent_meters) / (2.0 * extent_meters);
    double v = (y + extent_meters) / (2.0 * extent_meters);
    if (u < 0.0 || u >= 1.0 || v < 0.0 || v >= 1.0) return;
    std::size_t col = panel * (s + 1) + static_cast<std::size_t>(u * static_cast<double>(s));
    std::size_t row = static_cast<std::size_t>((1.0 - v) * static_cast<double>(s));
    if (row >= s) row = s - 1;
    img[row * width + col] = color;
  };
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    Vec3 p = cloud.point(i);
    splat(p[0], p[1], 0, class_color(truth[i]));
    splat(p[0], p[1], 1, class_color(pred[i]));
  }
  std::ofstream os(path, std::ios::binary);
  check(os.is_open(), ErrorCode::kIo, "cannot open '" + path + "' for writing");
  os << "P6\n" << width << " " << s << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.data()),
           static_cast<std::streamsize>(img.size() * 3));
  check(os.good(), ErrorCode::kIo, "ppm write failed");
}

}  // namespace camguide
