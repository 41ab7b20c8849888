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
#ifndef CAMGUIDE_PIPELINE_HPP_
#define CAMGUIDE_PIPELINE_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "camguide/datagen.hpp"
#include "camguide/ig2d.hpp"
#include "camguide/metrics.hpp"
#include "camguide/model3d.hpp"
#include "camguide/teacher.hpp"

namespace camguide {

struct Toggles {
  bool mt = false;
  bool ig = false;
  bool cl = false;
  bool fovmix = false;

  std::string str() const;
  // Comma-separated subset of {mt, ig, cl, fovmix}; empty string = baseline.
  static Toggles parse(const std::string& s);
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t class_count = 4;
  std::size_t guide_dim = 16;  // d
  double alpha = 0.999;
  double lambda = 0.001;
  double lambda_p = 10.0;
  double tau = 0.1;
  double scribble_budget = 0.08;
  double semi_rate = 0.0;  // 0 = weak (scribble) mode
  std::size_t steps = 900;
  double lr = 0.06;
  Toggles toggles;
  std::size_t train_frames = 64;
  std::size_t val_frames = 24;
  std::size_t source_frames = 16;
  std::vector<std::size_t> trunk_hidden = {32};
  std::size_t trunk_out = 32;
  std::size_t guide_steps = 800;
  std::size_t guide_hidden = 16;
  double guide_lr = 0.08;
  std::size_t eval_every = 300;

  bool semi_mode() const { return semi_rate > 0.0; }
  // Toggle lattice: ig requires a guide, cl requires ig.
  void validate(bool guide_present) const;
  Model3dSpec model_spec() const;
  SceneConfig scene_config(Domain domain) const;
  GuideTrainConfig guide_config() const;
};

// key = value serialization (doubles carry every config field exactly).
std::map<std::string, double> config_to_kv(const RunConfig& cfg);
void config_from_kv(RunConfig& cfg, const std::map<std::string, double>& kv);
void write_config(std::ostream& os, const RunConfig& cfg);
RunConfig read_config_file(const std::string& path);
void apply_config_kv(RunConfig& cfg, const std::string& key, const std::string& value);

// --- dataset ---

// Frame plus caches derived at load time. `features` feeds the 3D model;
// border flags are filled for evaluation splits (val frames).
struct TrainFrame {
  Frame frame;
  Array features;                    // N x feature_dim
  std::vector<std::uint8_t> border;  // empty unless computed
};

struct Dataset {
  std::vector<TrainFrame> train;
  std::vector<TrainFrame> val;
  std::vector<TrainFrame> source;
  std::vector<std::uint8_t> small_class;
};

// Per-point inputs for the 3D model: height, horizontal range, height above
// the local neighborhood minimum, local vertical extent, local density.
// All five are invariant under yaw rotation about the sensor.
constexpr std::size_t kPointFeatureDim = 5;
Array compute_point_features(const PointCloud& cloud);

// Writes DIR/{train,val,source}/frame_NNNN.fdf plus a manifest. Weak labels
// follow the config: scribbles in weak mode, uniformly sampled fully
// labeled frames in semi mode.
void generate_dataset(const RunConfig& cfg, const std::string& dir);
Dataset load_dataset(const std::string& dir, std::size_t class_count);

// --- training ---

struct Checkpoint {
  RunConfig cfg;
  ParamVector student;
  TeacherState teacher;
  GuideModel guide;
  bool has_guide = false;
  std::uint64_t step = 0;
  std::vector<std::uint64_t> history_step;
  std::vector<double> history_miou;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

struct StepStats {
  double supervised = 0, consistency = 0, ig = 0, contrastive = 0, total = 0;
};

// Runs the full training loop from cfg: init, per-step FOVMix / forward /
// losses / SGD / EMA, periodic val mIoU. Deterministic in (cfg, data).
Checkpoint train_student(const RunConfig& cfg, const Dataset& data, const GuideModel* guide,
                         std::vector<StepStats>* trace = nullptr);
// Continues a loaded checkpoint to ckpt.cfg.steps.
Checkpoint train_student_from(Checkpoint ckpt, const Dataset& data,
                              std::vector<StepStats>* trace = nullptr);

EvalReport evaluate_student(const Checkpoint& ckpt, const std::vector<TrainFrame>& frames,
                            const std::vector<std::uint8_t>& small_class,
                            double ref_miou = -1.0);

// Points that receive any gradient signal under the given toggles: weak-
// labeled points, plus unlabeled (MT), in-image (IG), and out-points whose
// teacher class has in-image support (CL).
std::vector<std::uint8_t> supervision_mask(const Toggles& toggles,
                                           const std::vector<std::uint8_t>& weak_mask,
                                           const std::vector<int>& in_image,
                                           const std::vector<int>& out_image,
                                           const std::vector<int>& teacher_class);

// --- ablation harness ---

struct AblationResult {
  std::vector<Toggles> toggles;           // the six benchmark rows
  std::vector<std::vector<double>> miou;  // [row][seed]
  std::vector<std::vector<double>> rel;   // [row][seed]
  std::vector<double> ref_miou;           // per seed
  std::vector<EvalReport> mt_split;       // per seed, MT row
  std::vector<EvalReport> mtig_split;     // per seed, MT+IG row
  std::vector<double> da_target_acc;      // per seed (guide with weighted DA)
  std::vector<double> src_only_target_acc;

  double mean_miou(std::size_t row) const;
  double mean_rel(std::size_t row) const;
};

AblationResult run_ablation(const RunConfig& base, const Dataset& data, std::size_t seeds,
                            bool include_da_check = true, std::ostream* progress = nullptr);
void write_ablation_table(std::ostream& os, const AblationResult& r);

// --- CLI ---

// Subcommands: gen-data, train-guide, train-student, eval, ablate.
// Returns the process exit status (0 success; distinct codes per
// ErrorCode otherwise).
int cli_main(int argc, const char* const* argv);

}  // namespace camguide

#endif  // CAMGUIDE_PIPELINE_HPP_
