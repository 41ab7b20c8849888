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
#ifndef CAMGUIDE_IG2D_HPP_
#define CAMGUIDE_IG2D_HPP_

#include <cstdint>
#include <vector>

#include "camguide/datagen.hpp"
#include "camguide/mlp.hpp"

namespace camguide {

// Per-pixel classifier over local 3x3 patches: a featurizer MLP mapping the
// 27 patch values to d-dimensional features, and a single linear classifier
// on top. The featurizer output (before the classifier) is what the 3D
// stage distills.
struct GuideModel {
  std::size_t patch = 3;
  std::size_t guide_dim = 16;   // d
  std::size_t class_count = 4;
  std::size_t hidden = 16;
  ParamVector params;  // featurizer under "feat.", classifier under "cls."

  MlpSpec feat_spec() const;
  MlpSpec cls_spec() const;
};

GuideModel make_guide(std::size_t class_count, std::size_t guide_dim, std::size_t hidden,
                      std::uint64_t seed);

// (H*W) x 27 patch matrix, border pixels clamped to the image edge.
Array extract_patches(const Array& image);

// Featurizer output for every pixel, shape {H, W, d}. Pure function of
// (model, image); no tape is ever involved.
Array guide_features(const GuideModel& model, const Array& image);
// Same data viewed as (H*W) x d.
Array guide_feature_rows(const GuideModel& model, const Array& image);

// Classifier argmax per pixel.
std::vector<int> guide_predict(const GuideModel& model, const Array& image);

// Teacher argmax everywhere, then every weak-labeled point with a valid
// correspondence overwrites its pixel with the point's label (the nearest
// point wins when several hit one pixel). `projected` marks those pixels.
struct PseudoLabelMap {
  std::uint32_t width = 0, height = 0;
  std::vector<std::uint16_t> classes;
  std::vector<std::uint8_t> projected;
};
PseudoLabelMap make_pseudo_labels(const GuideModel& teacher, const Frame& frame);

// L_S + L_DA: mean cross-entropy on dense source labels plus per-pixel
// cross-entropy on (target image, pseudo labels), weighted lambda_p at
// projected pixels and 1 elsewhere.
Tensor da_loss(Tape& tape, const TapedParams& lifted, const GuideModel& model,
               const std::vector<const Frame*>& source_batch,
               const std::vector<const Frame*>& target_batch,
               const std::vector<const PseudoLabelMap*>& pseudo, double lambda_p);

struct GuideTrainConfig {
  std::size_t guide_dim = 16;
  std::size_t hidden = 16;
  std::size_t class_count = 4;
  double lr = 0.08;
  double alpha = 0.999;
  double lambda_p = 10.0;
  std::size_t steps = 800;
  std::size_t steps_per_epoch = 50;  // pseudo-labels refresh cadence
  std::uint64_t seed = 0;
  bool use_da = true;         // false: plain source-only training
  bool use_projected = true;  // augment pseudo labels with projected weak labels
};

// Mean-teacher training of the 2D model; returns the frozen student.
// Aborts with a kNumeric error if the loss stops being finite.
GuideModel train_guide(const std::vector<Frame>& source_frames,
                       const std::vector<Frame>& target_frames, const GuideTrainConfig& cfg);

// Pixel accuracy of the classifier against dense class maps.
double guide_pixel_accuracy(const GuideModel& model, const std::vector<Frame>& frames);

// Checkpoint IO (named-array container with a small meta block).
void save_guide(const std::string& path, const GuideModel& model);
GuideModel load_guide(const std::string& path);

}  // namespace camguide

#endif  // CAMGUIDE_IG2D_HPP_
