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
#include "camguide/ig2d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "camguide/error.hpp"
#include "camguide/rng.hpp"
#include "camguide/teacher.hpp"

namespace camguide {

MlpSpec GuideModel::feat_spec() const {
  return MlpSpec{{patch * patch * 3, hidden, guide_dim}, "feat."};
}

MlpSpec GuideModel::cls_spec() const { return MlpSpec{{guide_dim, class_count}, "cls."}; }

GuideModel make_guide(std::size_t class_count, std::size_t guide_dim, std::size_t hidden,
                      std::uint64_t seed) {
  GuideModel m;
  m.class_count = class_count;
  m.guide_dim = guide_dim;
  m.hidden = hidden;
  m.params = mlp_init(m.feat_spec(), seed);
  m.params.merge(mlp_init(m.cls_spec(), seed + 1));
  return m;
}

Array extract_patches(const Array& image) {
  check(image.rank() == 3 && image.dim(2) == 3, ErrorCode::kInternal,
        "extract_patches: image must be H x W x 3");
  std::size_t H = image.dim(0), W = image.dim(1);
  Array patches({H * W, 27});
  auto clampi = [](long v, long lo, long hi) { return v < lo ? lo : (v > hi ? hi : v); };
  for (std::size_t v = 0; v < H; ++v) {
    for (std::size_t u = 0; u < W; ++u) {
      double* row = patches.data() + (v * W + u) * 27;
      std::size_t k = 0;
      for (long dv = -1; dv <= 1; ++dv) {
        for (long du = -1; du <= 1; ++du) {
          long vv = clampi(static_cast<long>(v) + dv, 0, static_cast<long>(H) - 1);
          long uu = clampi(static_cast<long>(u) + du, 0, static_cast<long>(W) - 1);
          const double* px = image.data() + (static_cast<std::size_t>(vv) * W +
                                             static_cast<std::size_t>(uu)) * 3;
          row[k++] = px[0];
          row[k++] = px[1];
          row[k++] = px[2];
        }
      }
    }
  }
  return patches;
}

Array guide_feature_rows(const GuideModel& model, const Array& image) {
  return mlp_eval(model.params, extract_patches(image), model.feat_spec());
}

Array guide_features(const GuideModel& model, const Array& image) {
  Array rows = guide_feature_rows(model, image);
  std::vector<double> data(rows.data(), rows.data() + rows.size());
  return Array({image.dim(0), image.dim(1), model.guide_dim}, std::move(data));
}

std::vector<int> guide_predict(const GuideModel& model, const Array& image) {
  Array feats = guide_feature_rows(model, image);
  return argmax_rows(mlp_eval(model.params, feats, model.cls_spec()));
}

PseudoLabelMap make_pseudo_labels(const GuideModel& teacher, const Frame& frame) {
  check(frame.cam.height == frame.image.dim(0) && frame.cam.width == frame.image.dim(1),
        ErrorCode::kConfig, "make_pseudo_labels: image extent does not match camera");
  PseudoLabelMap map;
  map.width = frame.cam.width;
  map.height = frame.cam.height;
  std::vector<int> pred = guide_predict(teacher, frame.image);
  map.classes.resize(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    map.classes[i] = static_cast<std::uint16_t>(pred[i]);
  }
  map.projected.assign(pred.size(), 0);

  Correspondence corr = project(frame.cloud, frame.cam);
  std::vector<double> best_depth(pred.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < frame.point_count(); ++i) {
    if (!frame.weak_mask[i] || !corr.valid[i]) continue;
    std::size_t pix = static_cast<std::size_t>(corr.l[i]) * map.width +
                      static_cast<std::size_t>(corr.k[i]);
    if (corr.depth[i] < best_depth[pix]) {
      best_depth[pix] = corr.depth[i];
      map.classes[pix] = frame.labels[i];
      map.projected[pix] = 1;
    }
  }
  return map;
}

namespace {

// Cross-entropy per pixel against `target` classes; weighted mean if w is
// non-null (weights enter the numerator only, as plain multipliers).
Tensor pixel_ce(Tape& tape, const TapedParams& lifted, const GuideModel& model,
                const Array& image, const std::vector<std::uint16_t>& target,
                const std::vector<double>* w) {
  Array patches = extract_patches(image);
  Tensor feats = mlp_forward(tape, lifted, patches, model.feat_spec());
  Tensor logits = mlp_forward(tape, lifted, feats, model.cls_spec());
  std::vector<int> cols(target.size());
  for (std::size_t i = 0; i < target.size(); ++i) cols[i] = static_cast<int>(target[i]);
  Tensor ce = sub(logsumexp_rows(logits), pick_per_row(logits, cols));
  if (!w) return mean(ce);
  Array weights({target.size()});
  for (std::size_t i = 0; i < target.size(); ++i) weights[i] = (*w)[i];
  return mul_scalar(dot_const(ce, weights), 1.0 / static_cast<double>(target.size()));
}

Tensor average(Tape& tape, const std::vector<Tensor>& parts) {
  if (parts.empty()) return tape.constant(Array::scalar(0.0));
  Tensor acc = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) acc = add(acc, parts[i]);
  return mul_scalar(acc, 1.0 / static_cast<double>(parts.size()));
}

}  // namespace

Tensor da_loss(Tape& tape, const TapedParams& lifted, const GuideModel& model,
               const std::vector<const Frame*>& source_batch,
               const std::vector<const Frame*>& target_batch,
               const std::vector<const PseudoLabelMap*>& pseudo, double lambda_p) {
  check(lambda_p >= 1.0, ErrorCode::kConfig, "da_loss: lambda_p must be at least 1");
  check(target_batch.size() == pseudo.size(), ErrorCode::kInternal,
        "da_loss: one pseudo-label map per target frame required");
  std::vector<Tensor> source_terms;
  for (const Frame* f : source_batch) {
    source_terms.push_back(pixel_ce(tape, lifted, model, f->image, f->dense_class, nullptr));
  }
  std::vector<Tensor> target_terms;
  for (std::size_t i = 0; i < target_batch.size(); ++i) {
    const PseudoLabelMap& map = *pseudo[i];
    std::vector<double> w(map.classes.size());
    for (std::size_t p = 0; p < w.size(); ++p) w[p] = map.projected[p] ? lambda_p : 1.0;
    target_terms.push_back(
        pixel_ce(tape, lifted, model, target_batch[i]->image, map.classes, &w));
  }
  return add(average(tape, source_terms), average(tape, target_terms));
}

GuideModel train_guide(const std::vector<Frame>& source_frames,
                       const std::vector<Frame>& target_frames, const GuideTrainConfig& cfg) {
  check(!source_frames.empty(), ErrorCode::kConfig, "train_guide: no source frames");
  check(!cfg.use_da || !target_frames.empty(), ErrorCode::kConfig,
        "train_guide: domain adaptation requested without target frames");

  GuideModel student =
      make_guide(cfg.class_count, cfg.guide_dim, cfg.hidden, cfg.seed);
  TeacherState teacher = make_teacher(student.params, cfg.alpha);

  std::vector<PseudoLabelMap> pseudo(target_frames.size());
  GuideModel teacher_view = student;  // same specs, shadow weights swapped in

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    if (cfg.use_da && step % cfg.steps_per_epoch == 0) {
      // Pseudo-labels are frozen between refreshes and recomputed from the
      // teacher EMA once per epoch.
      teacher_view.params = teacher.shadow;
      for (std::size_t i = 0; i < target_frames.size(); ++i) {
        pseudo[i] = make_pseudo_labels(teacher_view, target_frames[i]);
        if (!cfg.use_projected) {
          std::fill(pseudo[i].projected.begin(), pseudo[i].projected.end(), 0);
        }
      }
    }

    Rng pick = derive_rng(cfg.seed, {stream::kGuideOrder, step});
    const Frame& src = source_frames[pick.uniform_int(source_frames.size())];

    Tape tape;
    TapedParams lifted = lift(tape, student.params);
    Tensor loss;
    if (cfg.use_da) {
      std::size_t ti = pick.uniform_int(target_frames.size());
      std::vector<const Frame*> sb = {&src};
      std::vector<const Frame*> tb = {&target_frames[ti]};
      std::vector<const PseudoLabelMap*> pb = {&pseudo[ti]};
      loss = da_loss(tape, lifted, student, sb, tb, pb, cfg.lambda_p);
    } else {
      std::vector<const Frame*> sb = {&src};
      loss = da_loss(tape, lifted, student, sb, {}, {}, cfg.lambda_p);
    }
    double loss_value = loss.val()[0];
    check(std::isfinite(loss_value), ErrorCode::kNumeric,
          "train_guide: loss diverged at step " + std::to_string(step));

    ParamVector grads = grad(tape, loss, lifted);
    student.params.add_scaled(grads, -cfg.lr);
    ema_update(teacher, student.params);
  }
  check(student.params.all_finite(), ErrorCode::kNumeric, "train_guide: non-finite weights");
  return student;  // copied out and never mutated again: the frozen guide
}

double guide_pixel_accuracy(const GuideModel& model, const std::vector<Frame>& frames) {
  std::uint64_t hit = 0, total = 0;
  for (const Frame& f : frames) {
    std::vector<int> pred = guide_predict(model, f.image);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (static_cast<std::uint16_t>(pred[i]) == f.dense_class[i]) ++hit;
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(total);
}

void save_guide(const std::string& path, const GuideModel& model) {
  std::map<std::string, Array> entries = to_entries(model.params, "guide.");
  entries["meta.patch"] = Array::scalar(static_cast<double>(model.patch));
  entries["meta.guide_dim"] = Array::scalar(static_cast<double>(model.guide_dim));
  entries["meta.class_count"] = Array::scalar(static_cast<double>(model.class_count));
  entries["meta.hidden"] = Array::scalar(static_cast<double>(model.hidden));
  save_container(path, entries);
}

GuideModel load_guide(const std::string& path) {
  std::map<std::string, Array> entries = load_container(path);
  GuideModel m;
  m.patch = static_cast<std::size_t>(entries.at("meta.patch")[0]);
  m.guide_dim = static_cast<std::size_t>(entries.at("meta.guide_dim")[0]);
  m.class_count = static_cast<std::size_t>(entries.at("meta.class_count")[0]);
  m.hidden = static_cast<std::size_t>(entries.at("meta.hidden")[0]);
  m.params = from_entries(entries, "guide.");
  check(!m.params.empty(), ErrorCode::kIo, "guide checkpoint has no parameters");
  return m;
}

}  // namespace camguide
