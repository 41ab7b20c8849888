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
#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "camguide/error.hpp"
#include "camguide/pipeline.hpp"

namespace camguide {
namespace {

RunConfig base_config(const std::string& config_path) {
  return config_path.empty() ? RunConfig{} : read_config_file(config_path);
}

int run_gen_data(const std::string& out, const std::string& config_path, std::uint64_t seed,
                 bool seed_set, long frames, long val, long source, double semi,
                 double scribble) {
  RunConfig cfg = base_config(config_path);
  if (seed_set) cfg.seed = seed;
  if (frames > 0) cfg.train_frames = static_cast<std::size_t>(frames);
  if (val > 0) cfg.val_frames = static_cast<std::size_t>(val);
  if (source > 0) cfg.source_frames = static_cast<std::size_t>(source);
  check(!(semi > 0.0 && scribble > 0.0), ErrorCode::kUsage,
        "--semi and --scribble are mutually exclusive");
  if (semi > 0.0) cfg.semi_rate = semi;
  if (scribble > 0.0) {
    cfg.scribble_budget = scribble;
    cfg.semi_rate = 0.0;
  }
  generate_dataset(cfg, out);
  std::cout << "wrote dataset to " << out << " (" << cfg.train_frames << " train, "
            << cfg.val_frames << " val, " << cfg.source_frames << " source)\n";
  return 0;
}

int run_train_guide(const std::string& data, const std::string& out,
                    const std::string& config_path, std::uint64_t seed, bool seed_set,
                    long steps, bool source_only) {
  RunConfig cfg = base_config(config_path);
  if (seed_set) cfg.seed = seed;
  if (steps > 0) cfg.guide_steps = static_cast<std::size_t>(steps);
  Dataset ds = load_dataset(data, cfg.class_count);
  std::vector<Frame> source_frames, target_frames;
  for (const TrainFrame& tf : ds.source) source_frames.push_back(tf.frame);
  for (const TrainFrame& tf : ds.train) target_frames.push_back(tf.frame);
  GuideTrainConfig gcfg = cfg.guide_config();
  gcfg.use_da = !source_only;
  GuideModel guide = train_guide(source_frames, target_frames, gcfg);
  save_guide(out, guide);
  std::cout << "guide trained (" << gcfg.steps << " steps), target pixel acc "
            << guide_pixel_accuracy(guide, target_frames) << ", saved to " << out << "\n";
  return 0;
}

int run_train_student(const std::string& data, const std::string& out,
                      const std::string& guide_path, const std::string& toggles_str,
                      const std::string& config_path, std::uint64_t seed, bool seed_set,
                      long steps, const std::string& resume) {
  Checkpoint ckpt;
  if (!resume.empty()) {
    ckpt = load_checkpoint(resume);
    if (steps > 0) ckpt.cfg.steps = static_cast<std::size_t>(steps);
    Dataset ds = load_dataset(data, ckpt.cfg.class_count);
    ckpt = train_student_from(std::move(ckpt), ds);
    save_checkpoint(out, ckpt);
    std::cout << "resumed to step " << ckpt.step << ", saved to " << out << "\n";
    return 0;
  }
  RunConfig cfg = base_config(config_path);
  if (seed_set) cfg.seed = seed;
  if (steps > 0) cfg.steps = static_cast<std::size_t>(steps);
  cfg.toggles = Toggles::parse(toggles_str);
  GuideModel guide;
  bool has_guide = !guide_path.empty();
  if (has_guide) guide = load_guide(guide_path);
  cfg.validate(has_guide);
  Dataset ds = load_dataset(data, cfg.class_count);
  Checkpoint result = train_student(cfg, ds, has_guide ? &guide : nullptr);
  save_checkpoint(out, result);
  double final_miou = result.history_miou.empty() ? -1.0 : result.history_miou.back();
  std::cout << "trained " << result.step << " steps, val mIoU " << final_miou
            << ", saved to " << out << "\n";
  return 0;
}

int run_eval(const std::string& ckpt_path, const std::string& data,
             const std::string& report_path, double ref_miou) {
  Checkpoint ckpt = load_checkpoint(ckpt_path);
  Dataset ds = load_dataset(data, ckpt.cfg.class_count);
  EvalReport report = evaluate_student(ckpt, ds.val, ds.small_class, ref_miou);
  std::ofstream txt(report_path);
  check(txt.is_open(), ErrorCode::kIo, "cannot open report file '" + report_path + "'");
  write_report_text(txt, report);
  std::ofstream kv(report_path + ".kv");
  check(kv.is_open(), ErrorCode::kIo, "cannot open '" + report_path + ".kv'");
  write_report_kv(kv, report);
  if (!ds.val.empty()) {
    Model3dSpec spec = ckpt.cfg.model_spec();
    EvalPrediction pred = model3d_eval(ckpt.student, ds.val[0].features, spec);
    write_bev_ppm(report_path + ".ppm", ds.val[0].frame.cloud, ds.val[0].frame.labels,
                  argmax_rows(pred.logits));
  }
  std::cout << "mIoU " << report.miou << ", report written to " << report_path << "\n";
  return 0;
}

int run_ablate(const std::string& data, const std::string& out,
               const std::string& config_path, std::size_t seeds) {
  RunConfig cfg = base_config(config_path);
  Dataset ds = load_dataset(data, cfg.class_count);
  AblationResult result = run_ablation(cfg, ds, seeds, true, &std::cout);
  std::ofstream os(out);
  check(os.is_open(), ErrorCode::kIo, "cannot open '" + out + "'");
  write_ablation_table(os, result);
  write_ablation_table(std::cout, result);
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"weakly- and semi-supervised LiDAR segmentation with camera guidance"};
  app.require_subcommand(1);

  std::string out, data, config_path, guide_path, toggles_str, report_path, resume;
  std::uint64_t seed = 0;
  long frames = 0, val = 0, source = 0, steps = 0;
  double semi = 0.0, scribble = 0.0, ref_miou = -1.0;
  std::size_t seeds = 5;
  bool source_only = false;

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  gen->add_option("--out", out)->required();
  gen->add_option("--frames", frames);
  gen->add_option("--val", val);
  gen->add_option("--source", source);
  auto* gen_seed = gen->add_option("--seed", seed);
  gen->add_option("--semi", semi);
  gen->add_option("--scribble", scribble);
  gen->add_option("--config", config_path);

  auto* tg = app.add_subcommand("train-guide", "train the 2D guide with weak DA");
  tg->add_option("--data", data)->required();
  tg->add_option("--out", out)->required();
  tg->add_option("--config", config_path);
  auto* tg_seed = tg->add_option("--seed", seed);
  tg->add_option("--steps", steps);
  tg->add_flag("--source-only", source_only);

  auto* ts = app.add_subcommand("train-student", "train the 3D student");
  ts->add_option("--data", data)->required();
  ts->add_option("--out", out)->required();
  ts->add_option("--guide", guide_path);
  ts->add_option("--toggles", toggles_str);
  ts->add_option("--config", config_path);
  auto* ts_seed = ts->add_option("--seed", seed);
  ts->add_option("--steps", steps);
  ts->add_option("--resume", resume);

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  ev->add_option("--ckpt", resume)->required();
  ev->add_option("--data", data)->required();
  ev->add_option("--report", report_path)->required();
  ev->add_option("--ref-miou", ref_miou);

  auto* ab = app.add_subcommand("ablate", "run the toggle ablation benchmark");
  ab->add_option("--data", data)->required();
  ab->add_option("--out", out)->required();
  ab->add_option("--seeds", seeds);
  ab->add_option("--config", config_path);

  try {
    app.parse(argc, argv);
    if (gen->parsed()) {
      return run_gen_data(out, config_path, seed, !gen_seed->empty(), frames, val, source,
                          semi, scribble);
    }
    if (tg->parsed()) {
      return run_train_guide(data, out, config_path, seed, !tg_seed->empty(), steps,
                             source_only);
    }
    if (ts->parsed()) {
      return run_train_student(data, out, guide_path, toggles_str, config_path, seed,
                               !ts_seed->empty(), steps, resume);
    }
    if (ev->parsed()) return run_eval(resume, data, report_path, ref_miou);
    if (ab->parsed()) return run_ablate(data, out, config_path, seeds);
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "usage error: " << e.what() << "\n";
    return static_cast<int>(ErrorCode::kUsage);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return static_cast<int>(ErrorCode::kInternal);
  }
}

}  // namespace camguide
