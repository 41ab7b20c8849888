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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "camguide/error.hpp"
#include "camguide/metrics.hpp"
#include "camguide/rng.hpp"

using namespace camguide;

namespace {

PointCloud cluster(double cx, double cy, double cz, int n, Rng& rng, double spread = 0.3) {
  PointCloud pc;
  for (int i = 0; i < n; ++i) {
    pc.push_back({cx + rng.uniform(-spread, spread), cy + rng.uniform(-spread, spread),
                  cz + rng.uniform(-spread, spread)});
  }
  return pc;
}

// O(N^2) oracle with explicit sorting: for each point, sort all others by
// (distance, index) and look at the first 16.
std::vector<std::uint8_t> border_oracle(const PointCloud& pc,
                                        const std::vector<std::uint16_t>& labels) {
  std::size_t n = pc.size();
  std::vector<std::uint8_t> out(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      Vec3 a = pc.point(i), b = pc.point(j);
      double d2 = (a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) +
                  (a[2] - b[2]) * (a[2] - b[2]);
      all.push_back({d2, j});
    }
    std::sort(all.begin(), all.end());
    for (std::size_t k = 0; k < 16 && k < all.size(); ++k) {
      if (labels[all[k].second] != labels[i]) out[i] = 1;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("perfect prediction gives mIoU 1") {
  std::vector<std::uint64_t> confusion = {10, 0, 0, 7};
  IouSummary s = iou_from_confusion(confusion, 2);
  CHECK(s.miou == doctest::Approx(1.0));
}

TEST_CASE("all-class-0 prediction on a half/half truth gives mIoU 0.25") {
  // 2 classes, predictions all class 0, truth half/half:
  // IoU_0 = 0.5, IoU_1 = 0 -> mIoU = 0.25.
  std::vector<std::uint64_t> confusion = {50, 0, 50, 0};
  IouSummary s = iou_from_confusion(confusion, 2);
  CHECK(s.per_class_iou[0] == doctest::Approx(0.5));
  CHECK(s.per_class_iou[1] == doctest::Approx(0.0));
  CHECK(s.miou == doctest::Approx(0.25));
}

TEST_CASE("classes absent from truth and prediction are excluded") {
  std::vector<std::uint64_t> confusion = {8, 0, 0, 0, 4, 0, 0, 0, 0};
  IouSummary s = iou_from_confusion(confusion, 3);
  // Class 1 here has FN=4 so it counts; class 2 is fully absent.
  CHECK(s.miou == doctest::Approx((1.0 + 0.0) / 2.0));
}

TEST_CASE("random confusion matches a set-based IoU oracle") {
  Rng rng(0);
  std::size_t C = 5, n = 1000;
  std::vector<std::uint16_t> truth(n);
  std::vector<int> pred(n);
  for (std::size_t i = 0; i < n; ++i) {
    truth[i] = static_cast<std::uint16_t>(rng.uniform_int(C));
    pred[i] = static_cast<int>(rng.uniform_int(C));
  }
  std::vector<std::uint64_t> confusion(C * C, 0);
  for (std::size_t i = 0; i < n; ++i) confusion[truth[i] * C + pred[i]]++;
  IouSummary s = iou_from_confusion(confusion, C);

  double mean = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    std::set<std::size_t> t_set, p_set;
    for (std::size_t i = 0; i < n; ++i) {
      if (truth[i] == c) t_set.insert(i);
      if (pred[i] == static_cast<int>(c)) p_set.insert(i);
    }
    std::vector<std::size_t> inter, uni;
    std::set_intersection(t_set.begin(), t_set.end(), p_set.begin(), p_set.end(),
                          std::back_inserter(inter));
    std::set_union(t_set.begin(), t_set.end(), p_set.begin(), p_set.end(),
                   std::back_inserter(uni));
    double iou = uni.empty() ? 0.0 : static_cast<double>(inter.size()) / uni.size();
    CHECK(s.per_class_iou[c] == doctest::Approx(iou).epsilon(1e-12));
    mean += iou;
  }
  CHECK(s.miou == doctest::Approx(mean / C).epsilon(1e-12));
}

TEST_CASE("border_split: single-class cloud has no borders") {
  Rng rng(1);
  PointCloud pc = cluster(0, 0, 0, 40, rng);
  std::vector<std::uint16_t> labels(40, 2);
  std::vector<std::uint8_t> border = border_split(pc, labels);
  for (std::uint8_t b : border) CHECK(b == 0);
}

TEST_CASE("border_split: two well-separated clusters have no borders") {
  Rng rng(2);
  PointCloud pc = cluster(0, 0, 0, 20, rng);
  PointCloud far = cluster(50, 0, 0, 20, rng);
  std::vector<std::uint16_t> labels(20, 0);
  for (std::size_t i = 0; i < far.size(); ++i) {
    pc.push_back(far.point(i));
    labels.push_back(1);
  }
  std::vector<std::uint8_t> border = border_split(pc, labels);
  for (std::uint8_t b : border) CHECK(b == 0);
}

TEST_CASE("border_split matches the O(N^2) oracle on a mixed scene") {
  Rng rng(0);
  PointCloud pc;
  std::vector<std::uint16_t> labels;
  for (int c = 0; c < 3; ++c) {
    PointCloud part = cluster(rng.uniform(-5, 5), rng.uniform(-5, 5), 0, 60, rng, 1.5);
    for (std::size_t i = 0; i < part.size(); ++i) {
      pc.push_back(part.point(i));
      labels.push_back(static_cast<std::uint16_t>(c));
    }
  }
  CHECK(border_split(pc, labels) == border_oracle(pc, labels));
}

TEST_CASE("border_split needs at least 17 points") {
  Rng rng(3);
  PointCloud pc = cluster(0, 0, 0, 16, rng);
  std::vector<std::uint16_t> labels(16, 0);
  CHECK_THROWS_AS(border_split(pc, labels), Error);
}

TEST_CASE("border_split is invariant under rigid transforms") {
  Rng rng(4);
  PointCloud pc;
  std::vector<std::uint16_t> labels;
  for (int c = 0; c < 2; ++c) {
    PointCloud part = cluster(c * 1.5, 0, 0, 40, rng, 1.0);
    for (std::size_t i = 0; i < part.size(); ++i) {
      pc.push_back(part.point(i));
      labels.push_back(static_cast<std::uint16_t>(c));
    }
  }
  std::vector<std::uint8_t> base = border_split(pc, labels);
  Mat3 rot = mat3_mul(yaw_rotation(1.1), Mat3{1, 0, 0, 0, std::cos(0.4), -std::sin(0.4), 0,
                                              std::sin(0.4), std::cos(0.4)});
  PointCloud moved;
  for (std::size_t i = 0; i < pc.size(); ++i) {
    Vec3 p = mat3_mul(rot, pc.point(i));
    moved.push_back({p[0] + 3.0, p[1] - 7.0, p[2] + 0.5});
  }
  CHECK(border_split(moved, labels) == base);
}

TEST_CASE("range_split boundary convention") {
  PointCloud pc;
  pc.push_back({0.0, 0.0, 0.0});    // origin: near
  pc.push_back({25.0, 0.0, 0.0});   // exactly 25 m: far
  pc.push_back({24.999, 0.0, 5.0}); // horizontal range decides, z ignored
  pc.push_back({20.0, 20.0, 0.0});  // hypot > 25: far
  std::vector<std::uint8_t> near = range_split(pc);
  CHECK(near[0] == 1);
  CHECK(near[1] == 0);
  CHECK(near[2] == 1);
  CHECK(near[3] == 0);
}

TEST_CASE("range split counts match brute force on a seed-0 frame") {
  Rng rng(0);
  PointCloud pc;
  for (int i = 0; i < 500; ++i) {
    pc.push_back({rng.uniform(-40, 40), rng.uniform(-40, 40), rng.uniform(-2, 2)});
  }
  std::vector<std::uint8_t> near = range_split(pc);
  std::size_t count = 0;
  for (std::size_t i = 0; i < pc.size(); ++i) {
    Vec3 p = pc.point(i);
    bool want = std::sqrt(p[0] * p[0] + p[1] * p[1]) < 25.0;
    CHECK(near[i] == (want ? 1 : 0));
    count += want;
  }
  CHECK(count > 0);
  CHECK(count < pc.size());
}

TEST_CASE("accuracy aggregates decompose exactly by population") {
  Rng rng(6);
  PointCloud pc;
  std::vector<std::uint16_t> truth;
  for (int c = 0; c < 3; ++c) {
    PointCloud part =
        cluster(rng.uniform(-20, 20), rng.uniform(-20, 20), 0, 80, rng, 2.0);
    for (std::size_t i = 0; i < part.size(); ++i) {
      pc.push_back(part.point(i));
      truth.push_back(static_cast<std::uint16_t>(c));
    }
  }
  std::vector<int> pred(truth.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    pred[i] = rng.uniform01() < 0.7 ? truth[i] : static_cast<int>(rng.uniform_int(3));
  }
  EvalAccumulator acc(3, {0, 1, 0});
  acc.add_frame(pc, truth, pred);
  EvalReport r = acc.finish();

  double border_weighted =
      (r.border_acc * r.border_points + r.non_border_acc * r.non_border_points) /
      static_cast<double>(r.total_points);
  CHECK(r.overall_acc == doctest::Approx(border_weighted).epsilon(1e-12));
  double range_weighted = (r.near_acc * r.near_points + r.far_acc * r.far_points) /
                          static_cast<double>(r.total_points);
  CHECK(r.overall_acc == doctest::Approx(range_weighted).epsilon(1e-12));

  // Confusion row sums equal per-class ground-truth counts.
  for (std::size_t c = 0; c < 3; ++c) {
    std::uint64_t row = 0;
    for (std::size_t j = 0; j < 3; ++j) row += r.confusion[c * 3 + j];
    std::uint64_t want = 0;
    for (std::uint16_t t : truth) want += (t == c);
    CHECK(row == want);
  }
}

TEST_CASE("report writers emit parseable output") {
  EvalAccumulator acc(2, {0, 1});
  Rng rng(8);
  PointCloud pc = cluster(0, 0, 0, 50, rng, 3.0);
  std::vector<std::uint16_t> truth(50);
  std::vector<int> pred(50);
  for (int i = 0; i < 50; ++i) {
    truth[i] = static_cast<std::uint16_t>(i % 2);
    pred[i] = (i % 3 == 0) ? 1 - truth[i] : truth[i];
  }
  acc.add_frame(pc, truth, pred);
  EvalReport r = acc.finish(0.9);

  std::ostringstream txt;
  write_report_text(txt, r);
  CHECK(txt.str().find("mIoU") != std::string::npos);
  CHECK(txt.str().find("rel mIoU") != std::string::npos);

  std::ostringstream kv;
  write_report_kv(kv, r);
  // Parse back the miou line and compare.
  std::istringstream in(kv.str());
  std::string line;
  bool found = false;
  while (std::getline(in, line)) {
    if (line.rfind("miou = ", 0) == 0) {
      CHECK(std::stod(line.substr(7)) == doctest::Approx(r.miou).epsilon(1e-15));
      found = true;
    }
  }
  CHECK(found);

  write_bev_ppm("/tmp/camguide_test_bev.ppm", pc, truth, pred);
  std::ifstream ppm("/tmp/camguide_test_bev.ppm", std::ios::binary);
  CHECK(ppm.is_open());
  std::string header;
  ppm >> header;
  CHECK(header == "P6");
}
