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
#include "camguide/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "camguide/error.hpp"
#include "camguide/fovmix.hpp"
#include "camguide/losses3d.hpp"
#include "camguide/rng.hpp"

namespace fs = std::filesystem;

namespace camguide {

std::string Toggles::str() const {
  std::string out;
  auto append = [&out](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ",";
    out += name;
  };
  append(mt, "mt");
  append(ig, "ig");
  append(cl, "cl");
  append(fovmix, "fovmix");
  return out;
}

Toggles Toggles::parse(const std::string& s) {
  Toggles t;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item == "mt") {
      t.mt = true;
    } else if (item == "ig") {
      t.ig = true;
    } else if (item == "cl") {
      t.cl = true;
    } else if (item == "fovmix") {
      t.fovmix = true;
    } else {
      throw Error(ErrorCode::kConfig, "unknown toggle '" + item + "'");
    }
  }
  return t;
}

void RunConfig::validate(bool guide_present) const {
  check(class_count >= 2, ErrorCode::kConfig, "config: class_count must be at least 2");
  check(alpha >= 0.0 && alpha <= 1.0, ErrorCode::kConfig, "config: alpha must lie in [0,1]");
  check(lambda >= 0.0, ErrorCode::kConfig, "config: lambda must be non-negative");
  check(lambda_p >= 1.0, ErrorCode::kConfig, "config: lambda_p must be at least 1");
  check(tau > 0.0, ErrorCode::kConfig, "config: tau must be positive");
  check(scribble_budget > 0.0 && scribble_budget < 1.0, ErrorCode::kConfig,
        "config: scribble budget must lie in (0,1)");
  check(semi_rate >= 0.0 && semi_rate <= 1.0, ErrorCode::kConfig,
        "config: semi rate must lie in [0,1]");
  check(lr > 0.0 && steps > 0, ErrorCode::kConfig, "config: bad optimizer settings");
  check(!toggles.ig || guide_present, ErrorCode::kConfig,
        "config: the ig toggle requires a trained guide");
  check(!toggles.cl || toggles.ig, ErrorCode::kConfig,
        "config: the cl toggle requires ig features");
}

Model3dSpec RunConfig::model_spec() const {
  Model3dSpec s;
  s.feature_dim = kPointFeatureDim;
  s.trunk_hidden = trunk_hidden;
  s.trunk_out = trunk_out;
  s.class_count = class_count;
  s.guide_dim = guide_dim;
  return s;
}

SceneConfig RunConfig::scene_config(Domain domain) const {
  SceneConfig s = SceneConfig::defaults(class_count);
  s.domain = domain;
  return s;
}

GuideTrainConfig RunConfig::guide_config() const {
  GuideTrainConfig g;
  g.guide_dim = guide_dim;
  g.hidden = guide_hidden;
  g.class_count = class_count;
  g.lr = guide_lr;
  g.alpha = alpha;
  g.lambda_p = lambda_p;
  g.steps = guide_steps;
  g.seed = seed;
  return g;
}

std::map<std::string, double> config_to_kv(const RunConfig& cfg) {
  std::map<std::string, double> kv;
  kv["seed"] = static_cast<double>(cfg.seed);
  kv["class_count"] = static_cast<double>(cfg.class_count);
  kv["guide_dim"] = static_cast<double>(cfg.guide_dim);
  kv["alpha"] = cfg.alpha;
  kv["lambda"] = cfg.lambda;
  kv["lambda_p"] = cfg.lambda_p;
  kv["tau"] = cfg.tau;
  kv["scribble_budget"] = cfg.scribble_budget;
  kv["semi_rate"] = cfg.semi_rate;
  kv["steps"] = static_cast<double>(cfg.steps);
  kv["lr"] = cfg.lr;
  kv["toggle_mt"] = cfg.toggles.mt ? 1.0 : 0.0;
  kv["toggle_ig"] = cfg.toggles.ig ? 1.0 : 0.0;
  kv["toggle_cl"] = cfg.toggles.cl ? 1.0 : 0.0;
  kv["toggle_fovmix"] = cfg.toggles.fovmix ? 1.0 : 0.0;
  kv["train_frames"] = static_cast<double>(cfg.train_frames);
  kv["val_frames"] = static_cast<double>(cfg.val_frames);
  kv["source_frames"] = static_cast<double>(cfg.source_frames);
  kv["trunk_hidden_count"] = static_cast<double>(cfg.trunk_hidden.size());
  for (std::size_t i = 0; i < cfg.trunk_hidden.size(); ++i) {
    kv["trunk_hidden_" + std::to_string(i)] = static_cast<double>(cfg.trunk_hidden[i]);
  }
  kv["trunk_out"] = static_cast<double>(cfg.trunk_out);
  kv["guide_steps"] = static_cast<double>(cfg.guide_steps);
  kv["guide_hidden"] = static_cast<double>(cfg.guide_hidden);
  kv["guide_lr"] = cfg.guide_lr;
  kv["eval_every"] = static_cast<double>(cfg.eval_every);
  return kv;
}

void config_from_kv(RunConfig& cfg, const std::map<std::string, double>& kv) {
  auto get = [&kv](const char* key, double fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
  };
  cfg.seed = static_cast<std::uint64_t>(get("seed", static_cast<double>(cfg.seed)));
  cfg.class_count = static_cast<std::size_t>(get("class_count", cfg.class_count));
  cfg.guide_dim = static_cast<std::size_t>(get("guide_dim", cfg.guide_dim));
  cfg.alpha = get("alpha", cfg.alpha);
  cfg.lambda = get("lambda", cfg.lambda);
  cfg.lambda_p = get("lambda_p", cfg.lambda_p);
  cfg.tau = get("tau", cfg.tau);
  cfg.scribble_budget = get("scribble_budget", cfg.scribble_budget);
  cfg.semi_rate = get("semi_rate", cfg.semi_rate);
  cfg.steps = static_cast<std::size_t>(get("steps", cfg.steps));
  cfg.lr = get("lr", cfg.lr);
  cfg.toggles.mt = get("toggle_mt", cfg.toggles.mt) != 0.0;
  cfg.toggles.ig = get("toggle_ig", cfg.toggles.ig) != 0.0;
  cfg.toggles.cl = get("toggle_cl", cfg.toggles.cl) != 0.0;
  cfg.toggles.fovmix = get("toggle_fovmix", cfg.toggles.fovmix) != 0.0;
  cfg.train_frames = static_cast<std::size_t>(get("train_frames", cfg.train_frames));
  cfg.val_frames = static_cast<std::size_t>(get("val_frames", cfg.val_frames));
  cfg.source_frames = static_cast<std::size_t>(get("source_frames", cfg.source_frames));
  std::size_t hidden_count =
      static_cast<std::size_t>(get("trunk_hidden_count", cfg.trunk_hidden.size()));
  std::vector<std::size_t> hidden;
  for (std::size_t i = 0; i < hidden_count; ++i) {
    std::string key = "trunk_hidden_" + std::to_string(i);
    auto it = kv.find(key);
    hidden.push_back(it == kv.end() && i < cfg.trunk_hidden.size()
                         ? cfg.trunk_hidden[i]
                         : static_cast<std::size_t>(it->second));
  }
  cfg.trunk_hidden = hidden;
  cfg.trunk_out = static_cast<std::size_t>(get("trunk_out", cfg.trunk_out));
  cfg.guide_steps = static_cast<std::size_t>(get("guide_steps", cfg.guide_steps));
  cfg.guide_hidden = static_cast<std::size_t>(get("guide_hidden", cfg.guide_hidden));
  cfg.guide_lr = get("guide_lr", cfg.guide_lr);
  cfg.eval_every = static_cast<std::size_t>(get("eval_every", cfg.eval_every));
}

void write_config(std::ostream& os, const RunConfig& cfg) {
  for (const auto& [key, value] : config_to_kv(cfg)) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    os << key << " = " << buf << "\n";
  }
}

void apply_config_kv(RunConfig& cfg, const std::string& key, const std::string& value) {
  std::map<std::string, double> base = config_to_kv(cfg);
  check(base.count(key) != 0 || key.rfind("trunk_hidden_", 0) == 0, ErrorCode::kConfig,
        "unknown config key '" + key + "'");
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(value.c_str(), &end);
  check(end != value.c_str() && *end == '\0' && errno == 0, ErrorCode::kConfig,
        "config value for '" + key + "' is not a number: '" + value + "'");
  std::map<std::string, double> kv = {{key, v}};
  // Unmentioned keys keep their current values.
  config_from_kv(cfg, kv);
}

RunConfig read_config_file(const std::string& path) {
  std::ifstream is(path);
  check(is.is_open(), ErrorCode::kIo, "cannot open config file '" + path + "'");
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string trimmed = line;
    auto hash = trimmed.find('#');
    if (hash != std::string::npos) trimmed = trimmed.substr(0, hash);
    auto notspace = [](unsigned char c) { return !std::isspace(c); };
    trimmed.erase(trimmed.begin(), std::find_if(trimmed.begin(), trimmed.end(), notspace));
    trimmed.erase(std::find_if(trimmed.rbegin(), trimmed.rend(), notspace).base(),
                  trimmed.end());
    if (trimmed.empty()) continue;
    auto eq = trimmed.find('=');
    check(eq != std::string::npos, ErrorCode::kConfig,
          "config line " + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trimmed.substr(0, eq);
    std::string value = trimmed.substr(eq + 1);
    key.erase(std::find_if(key.rbegin(), key.rend(), notspace).base(), key.end());
    value.erase(value.begin(), std::find_if(value.begin(), value.end(), notspace));
    apply_config_kv(cfg, key, value);
  }
  return cfg;
}

// --- dataset ---

Array compute_point_features(const PointCloud& cloud) {
  std::size_t n = cloud.size();
  Array feats({std::max<std::size_t>(n, 1), kPointFeatureDim});
  if (n == 0) return Array({1, kPointFeatureDim});
  constexpr double kRadius = 0.8;
  constexpr double kCell = 0.8;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> grid;
  auto cell_key = [](long cx, long cy) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cx)) << 32) |
           static_cast<std::uint32_t>(cy);
  };
  auto cell_of = [&](double v) { return static_cast<long>(std::floor(v / kCell)); };
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 p = cloud.point(i);
    grid[cell_key(cell_of(p[0]), cell_of(p[1]))].push_back(static_cast<std::uint32_t>(i));
  }
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 p = cloud.point(i);
    double zmin = p[2], zmax = p[2];
    std::size_t count = 0;
    long cx = cell_of(p[0]), cy = cell_of(p[1]);
    for (long dx = -1; dx <= 1; ++dx) {
      for (long dy = -1; dy <= 1; ++dy) {
        auto it = grid.find(cell_key(cx + dx, cy + dy));
        if (it == grid.end()) continue;
        for (std::uint32_t j : it->second) {
          Vec3 q = cloud.point(j);
          double ddx = p[0] - q[0], ddy = p[1] - q[1];
          if (ddx * ddx + ddy * ddy > kRadius * kRadius) continue;
          zmin = std::min(zmin, q[2]);
          zmax = std::max(zmax, q[2]);
          ++count;
        }
      }
    }
    double r = std::hypot(p[0], p[1]);
    feats.at2(i, 0) = p[2] / 2.0;
    feats.at2(i, 1) = r / 40.0;
    feats.at2(i, 2) = (p[2] - zmin) / 2.0;
    feats.at2(i, 3) = (zmax - zmin) / 2.0;
    feats.at2(i, 4) = std::min<double>(static_cast<double>(count), 64.0) / 64.0;
  }
  return feats;
}

namespace {

std::string frame_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%04zu.fdf", i);
  return buf;
}

TrainFrame make_train_frame(Frame frame, bool with_border) {
  TrainFrame tf;
  tf.features = compute_point_features(frame.cloud);
  if (with_border) tf.border = border_split(frame.cloud, frame.labels);
  tf.frame = std::move(frame);
  return tf;
}

std::vector<TrainFrame> load_split(const fs::path& dir, bool with_border) {
  check(fs::is_directory(dir), ErrorCode::kIo, "missing dataset split: " + dir.string());
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".fdf") files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  std::vector<TrainFrame> out;
  out.reserve(files.size());
  for (const std::string& f : files) out.push_back(make_train_frame(load_frame(f), with_border));
  return out;
}

}  // namespace

void generate_dataset(const RunConfig& cfg, const std::string& dir) {
  cfg.validate(true);
  SceneConfig target_cfg = cfg.scene_config(Domain::kTarget);
  SceneConfig source_cfg = cfg.scene_config(Domain::kSource);
  fs::create_directories(fs::path(dir) / "train");
  fs::create_directories(fs::path(dir) / "val");
  fs::create_directories(fs::path(dir) / "source");

  std::vector<std::uint8_t> labeled_flags;
  if (cfg.semi_mode()) {
    labeled_flags = sample_frames(cfg.train_frames, cfg.semi_rate, cfg.seed);
  }
  for (std::size_t i = 0; i < cfg.train_frames; ++i) {
    Frame f = gen_scene(substream(cfg.seed, stream::kGenTrain, i), target_cfg);
    if (cfg.semi_mode()) {
      if (labeled_flags[i]) {
        f.frame_labeled = 1;  // dense weak mask straight from the generator
      } else {
        f.frame_labeled = 0;
        std::fill(f.weak_mask.begin(), f.weak_mask.end(), 0);
      }
    } else {
      f = scribble_sim(f, cfg.scribble_budget, substream(cfg.seed, stream::kScribble, i));
    }
    save_frame((fs::path(dir) / "train" / frame_name(i)).string(), f);
  }
  for (std::size_t i = 0; i < cfg.val_frames; ++i) {
    Frame f = gen_scene(substream(cfg.seed, stream::kGenVal, i), target_cfg);
    save_frame((fs::path(dir) / "val" / frame_name(i)).string(), f);
  }
  for (std::size_t i = 0; i < cfg.source_frames; ++i) {
    Frame f = gen_scene(substream(cfg.seed, stream::kGenSource, i), source_cfg);
    save_frame((fs::path(dir) / "source" / frame_name(i)).string(), f);
  }
  std::ofstream manifest(fs::path(dir) / "dataset.txt");
  check(manifest.is_open(), ErrorCode::kIo, "cannot write dataset manifest");
  manifest << "format = fdf1\n";
  write_config(manifest, cfg);
}

Dataset load_dataset(const std::string& dir, std::size_t class_count) {
  Dataset d;
  d.train = load_split(fs::path(dir) / "train", false);
  d.val = load_split(fs::path(dir) / "val", true);
  d.source = load_split(fs::path(dir) / "source", false);
  check(!d.train.empty() && !d.val.empty(), ErrorCode::kIo,
        "dataset at '" + dir + "' has empty splits");
  d.small_class = SceneConfig::defaults(class_count).small_class_flags();
  for (const TrainFrame& tf : d.train) {
    check(tf.frame.class_count == class_count, ErrorCode::kConfig,
          "dataset class count does not match config");
  }
  return d;
}

// --- checkpoints ---

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::map<std::string, Array> entries;
  for (const auto& [key, value] : config_to_kv(ckpt.cfg)) {
    entries["config." + key] = Array::scalar(value);
  }
  for (const auto& [name, arr] : ckpt.student) entries["student." + name] = arr;
  for (const auto& [name, arr] : ckpt.teacher.shadow) entries["teacher.shadow." + name] = arr;
  entries["teacher.alpha"] = Array::scalar(ckpt.teacher.alpha);
  entries["teacher.step"] = Array::scalar(static_cast<double>(ckpt.teacher.step));
  entries["meta.step"] = Array::scalar(static_cast<double>(ckpt.step));
  entries["meta.has_guide"] = Array::scalar(ckpt.has_guide ? 1.0 : 0.0);
  entries["history.count"] = Array::scalar(static_cast<double>(ckpt.history_step.size()));
  if (!ckpt.history_step.empty()) {
    Array hs({ckpt.history_step.size()});
    Array hm({ckpt.history_miou.size()});
    for (std::size_t i = 0; i < ckpt.history_step.size(); ++i) {
      hs[i] = static_cast<double>(ckpt.history_step[i]);
      hm[i] = ckpt.history_miou[i];
    }
    entries["history.step"] = std::move(hs);
    entries["history.miou"] = std::move(hm);
  }
  if (ckpt.has_guide) {
    for (const auto& [name, arr] : ckpt.guide.params) entries["guide.params." + name] = arr;
    entries["guide.meta.patch"] = Array::scalar(static_cast<double>(ckpt.guide.patch));
    entries["guide.meta.guide_dim"] =
        Array::scalar(static_cast<double>(ckpt.guide.guide_dim));
    entries["guide.meta.class_count"] =
        Array::scalar(static_cast<double>(ckpt.guide.class_count));
    entries["guide.meta.hidden"] = Array::scalar(static_cast<double>(ckpt.guide.hidden));
  }
  save_container(path, entries);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::map<std::string, Array> entries = load_container(path);
  Checkpoint ckpt;
  std::map<std::string, double> kv;
  for (const auto& [name, arr] : entries) {
    if (name.rfind("config.", 0) == 0) kv[name.substr(7)] = arr[0];
  }
  config_from_kv(ckpt.cfg, kv);
  ckpt.student = from_entries(entries, "student.");
  ckpt.teacher.shadow = from_entries(entries, "teacher.shadow.");
  ckpt.teacher.alpha = entries.at("teacher.alpha")[0];
  ckpt.teacher.step = static_cast<std::uint64_t>(entries.at("teacher.step")[0]);
  ckpt.step = static_cast<std::uint64_t>(entries.at("meta.step")[0]);
  ckpt.has_guide = entries.at("meta.has_guide")[0] != 0.0;
  std::size_t hist = static_cast<std::size_t>(entries.at("history.count")[0]);
  if (hist > 0) {
    const Array& hs = entries.at("history.step");
    const Array& hm = entries.at("history.miou");
    for (std::size_t i = 0; i < hist; ++i) {
      ckpt.history_step.push_back(static_cast<std::uint64_t>(hs[i]));
      ckpt.history_miou.push_back(hm[i]);
    }
  }
  if (ckpt.has_guide) {
    ckpt.guide.params = from_entries(entries, "guide.params.");
    ckpt.guide.patch = static_cast<std::size_t>(entries.at("guide.meta.patch")[0]);
    ckpt.guide.guide_dim = static_cast<std::size_t>(entries.at("guide.meta.guide_dim")[0]);
    ckpt.guide.class_count =
        static_cast<std::size_t>(entries.at("guide.meta.class_count")[0]);
    ckpt.guide.hidden = static_cast<std::size_t>(entries.at("guide.meta.hidden")[0]);
  }
  check(!ckpt.student.empty(), ErrorCode::kIo, "checkpoint has no student parameters");
  return ckpt;
}

// --- training ---

namespace {

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng(seed);
  rng.shuffle(perm);
  return perm;
}

// One training sample: either a plain frame view or a FOVMix output.
struct Sample {
  const Frame* frame = nullptr;
  Array features;                  // gathered for mixed samples
  const Array* features_ref = nullptr;
  std::vector<int> in_image;       // I (provenance-A only for mixed samples)
  std::vector<int> out_image;      // O
  std::vector<int> pixel_row;      // l*W + k per point, -1 when invalid
  int image_frame = -1;            // dataset index whose guide grid applies
};

const Array& sample_features(const Sample& s) {
  return s.features_ref ? *s.features_ref : s.features;
}

}  // namespace

std::vector<std::uint8_t> supervision_mask(const Toggles& toggles,
                                           const std::vector<std::uint8_t>& weak_mask,
                                           const std::vector<int>& in_image,
                                           const std::vector<int>& out_image,
                                           const std::vector<int>& teacher_class) {
  std::size_t n = weak_mask.size();
  std::vector<std::uint8_t> mask(n, 0);
  for (std::size_t i = 0; i < n; ++i) mask[i] = weak_mask[i] ? 1 : 0;
  if (toggles.mt) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!weak_mask[i]) mask[i] = 1;
    }
  }
  if (toggles.ig) {
    for (int i : in_image) mask[static_cast<std::size_t>(i)] = 1;
  }
  if (toggles.cl) {
    std::vector<std::uint8_t> class_has_in(256, 0);
    for (int i : in_image) {
      int c = teacher_class[static_cast<std::size_t>(i)];
      if (c >= 0 && c < 256) class_has_in[static_cast<std::size_t>(c)] = 1;
    }
    for (int o : out_image) {
      int c = teacher_class[static_cast<std::size_t>(o)];
      if (c >= 0 && c < 256 && class_has_in[static_cast<std::size_t>(c)]) {
        mask[static_cast<std::size_t>(o)] = 1;
      }
    }
  }
  return mask;
}

namespace {

std::vector<int> validate_and_project(const Frame& frame, Partition* part) {
  Correspondence corr = project(frame.cloud, frame.cam);
  *part = partition(corr);
  std::vector<int> pixel_row(frame.point_count(), -1);
  for (int i : part->in_image) {
    pixel_row[static_cast<std::size_t>(i)] =
        corr.l[static_cast<std::size_t>(i)] * static_cast<int>(frame.cam.width) +
        corr.k[static_cast<std::size_t>(i)];
  }
  return pixel_row;
}

double miou_on_frames(const Checkpoint& ckpt, const std::vector<TrainFrame>& frames,
                      const std::vector<std::uint8_t>& small_class) {
  EvalAccumulator acc(ckpt.cfg.class_count, small_class);
  Model3dSpec spec = ckpt.cfg.model_spec();
  for (const TrainFrame& tf : frames) {
    EvalPrediction pred = model3d_eval(ckpt.student, tf.features, spec);
    std::vector<int> cls = argmax_rows(pred.logits);
    if (!tf.border.empty()) {
      acc.add_frame(tf.frame.cloud, tf.frame.labels, cls, tf.border);
    } else {
      acc.add_frame(tf.frame.cloud, tf.frame.labels, cls);
    }
  }
  return acc.finish().miou;
}

}  // namespace

Checkpoint train_student(const RunConfig& cfg, const Dataset& data, const GuideModel* guide,
                         std::vector<StepStats>* trace) {
  cfg.validate(guide != nullptr);
  Checkpoint ckpt;
  ckpt.cfg = cfg;
  ckpt.student = model3d_init(cfg.model_spec(), substream(cfg.seed, stream::kStudentInit));
  ckpt.teacher = make_teacher(ckpt.student, cfg.alpha);
  if (guide != nullptr && cfg.toggles.ig) {
    ckpt.guide = *guide;
    ckpt.has_guide = true;
  }
  ckpt.step = 0;
  return train_student_from(std::move(ckpt), data, trace);
}

Checkpoint train_student_from(Checkpoint ckpt, const Dataset& data,
                              std::vector<StepStats>* trace) {
  const RunConfig& cfg = ckpt.cfg;
  cfg.validate(ckpt.has_guide);
  Model3dSpec mspec = cfg.model_spec();
  std::size_t n_train = data.train.size();
  check(n_train >= 2, ErrorCode::kConfig, "training needs at least two frames");

  std::vector<std::size_t> labeled_idx;
  for (std::size_t i = 0; i < n_train; ++i) {
    if (data.train[i].frame.frame_labeled) labeled_idx.push_back(i);
  }
  check(!cfg.semi_mode() || !labeled_idx.empty(), ErrorCode::kConfig,
        "semi mode requires at least one labeled frame");

  // The guide is frozen, so per-frame feature grids are constants.
  std::vector<Array> guide_grid(n_train);
  if (ckpt.has_guide) {
    for (std::size_t i = 0; i < n_train; ++i) {
      const Frame& f = data.train[i].frame;
      check(f.image.dim(0) == f.cam.height && f.image.dim(1) == f.cam.width,
            ErrorCode::kConfig, "image extent does not match camera");
      guide_grid[i] = guide_feature_rows(ckpt.guide, f.image);
    }
  }

  for (std::uint64_t step = ckpt.step; step < cfg.steps; ++step) {
    // Deterministic batch selection (stateless in step, so resume is exact).
    std::size_t f0, f1;
    if (cfg.semi_mode()) {
      std::uint64_t e0 = (step) / std::max<std::size_t>(labeled_idx.size(), 1);
      std::vector<std::size_t> lperm = seeded_permutation(
          labeled_idx.size(), substream(cfg.seed, stream::kBatchOrder, 1000 + e0));
      f0 = labeled_idx[lperm[step % labeled_idx.size()]];
      std::uint64_t e1 = step / n_train;
      std::vector<std::size_t> aperm =
          seeded_permutation(n_train, substream(cfg.seed, stream::kBatchOrder, e1));
      f1 = aperm[step % n_train];
    } else {
      std::uint64_t epoch = (2 * step) / n_train;
      std::vector<std::size_t> perm =
          seeded_permutation(n_train, substream(cfg.seed, stream::kBatchOrder, epoch));
      f0 = perm[(2 * step) % n_train];
      f1 = perm[(2 * step + 1) % n_train];
    }

    // Assemble the two training samples.
    std::vector<Sample> samples;
    std::vector<MixedSample> mixed;  // keeps mixed frames alive
    if (cfg.toggles.fovmix) {
      std::vector<const Frame*> batch = {&data.train[f0].frame, &data.train[f1].frame};
      mixed = fovmix_batch(batch, cfg.semi_mode(),
                           substream(cfg.seed, stream::kStudentMix, step));
      std::size_t slot_to_idx[2] = {f0, f1};
      for (MixedSample& m : mixed) {
        Sample s;
        s.frame = &m.frame;
        s.image_frame = static_cast<int>(slot_to_idx[m.a_frame]);
        // Per-point features travel with their source points (they are
        // yaw-invariant, so the batch rotation does not stale them).
        Array feats({std::max<std::size_t>(m.frame.point_count(), 1), kPointFeatureDim});
        for (std::size_t p = 0; p < m.frame.point_count(); ++p) {
          std::size_t src_frame = slot_to_idx[m.provenance[p] == 0
                                                  ? static_cast<std::size_t>(m.a_frame)
                                                  : static_cast<std::size_t>(m.b_frame)];
          const Array& src = data.train[src_frame].features;
          for (std::size_t c = 0; c < kPointFeatureDim; ++c) {
            feats.at2(p, c) = src.at2(static_cast<std::size_t>(m.src_index[p]), c);
          }
        }
        s.features = std::move(feats);
        // I is kept-A's validly projecting points by construction; stray
        // B points that wander into the new FOV sector carry no image
        // content and stay out-of-image.
        Partition part;
        s.pixel_row = validate_and_project(m.frame, &part);
        for (int i : part.in_image) {
          if (m.provenance[static_cast<std::size_t>(i)] == 0) {
            s.in_image.push_back(i);
          } else {
            s.out_image.push_back(i);
          }
        }
        s.out_image.insert(s.out_image.end(), part.out_image.begin(), part.out_image.end());
        std::sort(s.out_image.begin(), s.out_image.end());
        samples.push_back(std::move(s));
      }
    } else {
      for (std::size_t idx : {f0, f1}) {
        Sample s;
        s.frame = &data.train[idx].frame;
        s.features_ref = &data.train[idx].features;
        s.image_frame = static_cast<int>(idx);
        Partition part;
        s.pixel_row = validate_and_project(*s.frame, &part);
        s.in_image = part.in_image;
        s.out_image = part.out_image;
        samples.push_back(std::move(s));
      }
    }

    // Forward, losses, gradients.
    ParamVector grad_accum = ckpt.student;
    for (auto& [name, arr] : grad_accum) arr = Array::zeros_like(arr);
    StepStats stats;
    LossFlags flags;
    for (Sample& s : samples) {
      const Array& feats = sample_features(s);
      EvalPrediction teacher_out = teacher_predict(ckpt.teacher, feats, mspec);
      GuidanceTargets guidance;
      guidance.teacher_class = assign_classes(teacher_out.logits);
      if (ckpt.has_guide && cfg.toggles.ig) {
        const Array& grid = guide_grid[static_cast<std::size_t>(s.image_frame)];
        Array ig({std::max<std::size_t>(s.in_image.size(), 1), cfg.guide_dim});
        for (std::size_t r = 0; r < s.in_image.size(); ++r) {
          int row = s.pixel_row[static_cast<std::size_t>(s.in_image[r])];
          for (std::size_t c = 0; c < cfg.guide_dim; ++c) {
            ig.at2(r, c) = grid.at2(static_cast<std::size_t>(row), c);
          }
        }
        if (s.in_image.empty()) ig = Array({0, cfg.guide_dim});
        guidance.ig_features = std::move(ig);
      }

      Tape tape;
      TapedParams lifted = lift(tape, ckpt.student);
      Prediction pred = model3d_forward(tape, lifted, feats, mspec);
      LossTerms terms;
      terms.supervised = supervised_ce(pred, s.frame->labels, s.frame->weak_mask);
      terms.consistency = cfg.toggles.mt
                              ? mt_consistency(pred, teacher_out.logits, s.frame->weak_mask)
                              : tape.constant(Array::scalar(0.0));
      terms.ig = cfg.toggles.ig ? ig_distill(pred, guidance, s.in_image, &flags)
                                : tape.constant(Array::scalar(0.0));
      terms.contrastive =
          cfg.toggles.cl
              ? one_way_contrastive(pred, guidance, s.in_image, s.out_image, cfg.tau, &flags)
              : tape.constant(Array::scalar(0.0));
      Tensor total = total_loss(terms, cfg.lambda);
      double total_value = total.val()[0];
      if (!std::isfinite(total_value)) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "training diverged at step %llu (H=%g mt=%g ig=%g cl=%g)",
                      static_cast<unsigned long long>(step), terms.supervised.val()[0],
                      terms.consistency.val()[0], terms.ig.val()[0],
                      terms.contrastive.val()[0]);
        throw Error(ErrorCode::kNumeric, buf);
      }
      stats.supervised += 0.5 * terms.supervised.val()[0];
      stats.consistency += 0.5 * terms.consistency.val()[0];
      stats.ig += 0.5 * terms.ig.val()[0];
      stats.contrastive += 0.5 * terms.contrastive.val()[0];
      stats.total += 0.5 * total_value;

      ParamVector g = grad(tape, total, lifted);
      grad_accum.add_scaled(g, 0.5);
    }

    ckpt.student.add_scaled(grad_accum, -cfg.lr);
    ema_update(ckpt.teacher, ckpt.student);
    ckpt.step = step + 1;
    if (trace) trace->push_back(stats);

    if (cfg.eval_every > 0 &&
        (ckpt.step % cfg.eval_every == 0 || ckpt.step == cfg.steps)) {
      ckpt.history_step.push_back(ckpt.step);
      ckpt.history_miou.push_back(miou_on_frames(ckpt, data.val, data.small_class));
    }
  }
  return ckpt;
}

EvalReport evaluate_student(const Checkpoint& ckpt, const std::vector<TrainFrame>& frames,
                            const std::vector<std::uint8_t>& small_class, double ref_miou) {
  EvalAccumulator acc(ckpt.cfg.class_count, small_class);
  Model3dSpec spec = ckpt.cfg.model_spec();
  for (const TrainFrame& tf : frames) {
    EvalPrediction pred = model3d_eval(ckpt.student, tf.features, spec);
    std::vector<int> cls = argmax_rows(pred.logits);
    if (!tf.border.empty()) {
      acc.add_frame(tf.frame.cloud, tf.frame.labels, cls, tf.border);
    } else {
      acc.add_frame(tf.frame.cloud, tf.frame.labels, cls);
    }
  }
  return acc.finish(ref_miou);
}

// --- ablation ---

double AblationResult::mean_miou(std::size_t row) const {
  double s = 0.0;
  for (double v : miou[row]) s += v;
  return miou[row].empty() ? 0.0 : s / static_cast<double>(miou[row].size());
}

double AblationResult::mean_rel(std::size_t row) const {
  double s = 0.0;
  for (double v : rel[row]) s += v;
  return rel[row].empty() ? 0.0 : s / static_cast<double>(rel[row].size());
}

AblationResult run_ablation(const RunConfig& base, const Dataset& data, std::size_t seeds,
                            bool include_da_check, std::ostream* progress) {
  AblationResult result;
  result.toggles = {Toggles{},
                    Toggles{true, false, false, false},
                    Toggles{true, true, false, false},
                    Toggles{true, true, true, false},
                    Toggles{true, true, false, true},
                    Toggles{true, true, true, true}};
  result.miou.assign(result.toggles.size(), {});
  result.rel.assign(result.toggles.size(), {});

  // Fully supervised reference shares the frames but with dense labels.
  Dataset dense = data;
  for (TrainFrame& tf : dense.train) {
    std::fill(tf.frame.weak_mask.begin(), tf.frame.weak_mask.end(), 1);
    tf.frame.frame_labeled = 1;
  }

  std::vector<Frame> source_frames, target_frames;
  for (const TrainFrame& tf : data.source) source_frames.push_back(tf.frame);
  for (const TrainFrame& tf : data.train) target_frames.push_back(tf.frame);

  for (std::size_t s = 0; s < seeds; ++s) {
    RunConfig cfg = base;
    cfg.seed = base.seed + s;
    cfg.semi_rate = 0.0;  // the benchmark rows run in weak (scribble) mode

    RunConfig ref_cfg = cfg;
    ref_cfg.toggles = Toggles{};
    Checkpoint ref = train_student(ref_cfg, dense, nullptr);
    double ref_miou = evaluate_student(ref, data.val, data.small_class).miou;
    result.ref_miou.push_back(ref_miou);
    if (progress) {
      *progress << "seed " << cfg.seed << ": reference mIoU " << ref_miou << "\n";
    }

    GuideTrainConfig gcfg = cfg.guide_config();
    GuideModel guide = train_guide(source_frames, target_frames, gcfg);

    for (std::size_t row = 0; row < result.toggles.size(); ++row) {
      RunConfig row_cfg = cfg;
      row_cfg.toggles = result.toggles[row];
      Checkpoint ckpt =
          train_student(row_cfg, data, row_cfg.toggles.ig ? &guide : nullptr);
      EvalReport report = evaluate_student(ckpt, data.val, data.small_class, ref_miou);
      result.miou[row].push_back(report.miou);
      result.rel[row].push_back(report.rel_miou);
      if (row == 1) result.mt_split.push_back(report);
      if (row == 2) result.mtig_split.push_back(report);
      if (progress) {
        *progress << "seed " << cfg.seed << ": [" << result.toggles[row].str()
                  << "] mIoU " << report.miou << "\n";
      }
    }

    if (include_da_check) {
      GuideTrainConfig src_only = gcfg;
      src_only.use_da = false;
      GuideModel src_guide = train_guide(source_frames, target_frames, src_only);
      result.da_target_acc.push_back(guide_pixel_accuracy(guide, target_frames));
      result.src_only_target_acc.push_back(guide_pixel_accuracy(src_guide, target_frames));
      if (progress) {
        *progress << "seed " << cfg.seed << ": guide target acc (da) "
                  << result.da_target_acc.back() << " vs (source-only) "
                  << result.src_only_target_acc.back() << "\n";
      }
    }
  }
  return result;
}

void write_ablation_table(std::ostream& os, const AblationResult& r) {
  char buf[160];
  double ref = 0.0;
  for (double v : r.ref_miou) ref += v;
  if (!r.ref_miou.empty()) ref /= static_cast<double>(r.ref_miou.size());
  os << "MT IG CL FOVMix |   mIoU    rel\n";
  os << "----------------+---------------\n";
  for (std::size_t row = 0; row < r.toggles.size(); ++row) {
    const Toggles& t = r.toggles[row];
    std::snprintf(buf, sizeof(buf), "%2s %2s %2s %6s | %6.4f %5.1f%%",
                  t.mt ? "x" : "-", t.ig ? "x" : "-", t.cl ? "x" : "-",
                  t.fovmix ? "x" : "-", r.mean_miou(row), 100.0 * r.mean_rel(row));
    os << buf << "\n";
  }
  std::snprintf(buf, sizeof(buf), "fully supervised reference mIoU: %6.4f", ref);
  os << buf << "\n\n";

  if (!r.mt_split.empty() && !r.mtig_split.empty()) {
    auto mean_of = [](const std::vector<EvalReport>& reports, double EvalReport::*field) {
      double s = 0.0;
      for (const EvalReport& rep : reports) s += rep.*field;
      return reports.empty() ? 0.0 : s / static_cast<double>(reports.size());
    };
    os << "split            |     MT    MT+IG\n";
    os << "-----------------+----------------\n";
    const struct {
      const char* name;
      double EvalReport::*field;
    } rows[] = {
        {"border acc", &EvalReport::border_acc},
        {"non-border acc", &EvalReport::non_border_acc},
        {"small-object acc", &EvalReport::small_obj_acc},
        {"large-object acc", &EvalReport::large_obj_acc},
        {"near acc (0-25m)", &EvalReport::near_acc},
        {"far acc (25m+)", &EvalReport::far_acc},
    };
    for (const auto& row : rows) {
      std::snprintf(buf, sizeof(buf), "%-17s| %6.4f  %6.4f", row.name,
                    mean_of(r.mt_split, row.field), mean_of(r.mtig_split, row.field));
      os << buf << "\n";
    }
    os << "\n";
  }
  if (!r.da_target_acc.empty()) {
    auto mean_vec = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return v.empty() ? 0.0 : s / static_cast<double>(v.size());
    };
    std::snprintf(buf, sizeof(buf),
                  "guide target pixel acc: weighted-da %6.4f vs source-only %6.4f",
                  mean_vec(r.da_target_acc), mean_vec(r.src_only_target_acc));
    os << buf << "\n";
  }
}

}  // namespace camguide
