#include "commands.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "config.hpp"
#include "io.hpp"
#include "simota/errors.hpp"
#include "simota/parallel.hpp"

namespace simota::cli {

namespace {

struct Common {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> preset;
  std::optional<std::string> assigner;
  std::optional<unsigned> threads;
  std::string out;
};

void add_common(CLI::App* app, Common& c, bool with_assigner) {
  app->add_option("--config", c.config, "RunConfig JSON file");
  app->add_option("--seed", c.seed, "Root seed (u64)");
  app->add_option("--preset", c.preset, "Augmentation preset: small | large");
  app->add_option("--out", c.out, "Output file or directory");
  if (with_assigner) app->add_option("--assigner", c.assigner, "single_center | multi3x3 | simota | one_to_one");
  app->add_option("--threads", c.threads, "Worker threads (fallback: SIMOTA_KIT_THREADS)");
}

unsigned env_threads() {
  const char* v = std::getenv("SIMOTA_KIT_THREADS");
  if (!v || !*v) return 0;
  char* end = nullptr;
  const unsigned long n = std::strtoul(v, &end, 10);
  if (*end != '\0' || n == 0 || n > 1024) throw ValidationError("SIMOTA_KIT_THREADS must be an integer in [1, 1024]");
  return static_cast<unsigned>(n);
}

/// flags > config file > defaults; threads: --threads, then the env var,
/// then the config file.
RunConfig resolve(const Common& c) {
  RunConfig cfg;
  if (c.config) cfg = load_run_config(*c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.preset) apply_preset(cfg, *c.preset);
  if (c.assigner) cfg.fit.assigner = parse_assigner(*c.assigner);
  if (c.threads) {
    if (*c.threads == 0) throw ValidationError("--threads must be >= 1");
    cfg.threads = *c.threads;
  } else if (const unsigned t = env_threads()) {
    cfg.threads = t;
  }
  if (cfg.threads == 0) cfg.threads = 1;
  cfg.assigner.threads = cfg.threads;
  cfg.fit.assigner_cfg = cfg.assigner;
  cfg.fit.weights = cfg.loss;
  cfg.augment.seed = cfg.seed;
  return cfg;
}

/// Config as echoed into reports. Thread count is left out: results do
/// not depend on it and reports must match byte for byte across it.
Json echo(const RunConfig& c) {
  Json j = to_json(c);
  j.erase("threads");
  return j;
}

fs::path require_out(const Common& c, const char* what) {
  if (c.out.empty()) throw ValidationError(std::string("--out ") + what + " is required");
  return c.out;
}

fs::path sidecar(const fs::path& report) {
  auto p = report;
  p.replace_extension(".timings.json");
  return p;
}

int num_classes_for(const RunConfig& cfg, const Scene& s) {
  return cfg.fit.num_classes > 0 ? cfg.fit.num_classes : infer_num_classes(s);
}

std::vector<Scene> load_scenes(const std::vector<std::string>& paths) {
  std::vector<Scene> out;
  for (const auto& p : paths) out.push_back(read_scene(p));
  return out;
}

std::vector<Scene> generated_scenes(const RunConfig& cfg) {
  std::vector<Scene> out;
  for (int i = 0; i < cfg.scenes.count; ++i)
    out.push_back(make_scene(cfg.seed + static_cast<std::uint64_t>(i), cfg.scenes.objects, cfg.scenes.gen));
  return out;
}

Json assignment_json(const AssignResult& r, std::span<const AnchorPoint> anchors) {
  const auto& a = r.assignment;
  Json positives = Json::array();
  for (std::size_t j = 0; j < a.anchor_labels.size(); ++j) {
    if (a.anchor_labels[j] == kBackground) continue;
    positives.push_back(Json{{"anchor", j},
                             {"level", anchors[j].level},
                             {"gx", anchors[j].gx},
                             {"gy", anchors[j].gy},
                             {"gt", a.anchor_labels[j]}});
  }
  Json conflicts = Json::array();
  for (const auto& c : r.diagnostics.conflicts)
    conflicts.push_back(Json{{"anchor", c.anchor}, {"winner", c.winner}, {"losers", c.losers}});
  const auto& d = r.diagnostics;
  return Json{{"num_positives", a.num_positives()},
              {"k_values", a.k_values},
              {"per_gt_positives", a.per_gt_positives},
              {"positives", positives},
              {"diagnostics",
               {{"k_values", d.k_values},
                {"candidate_counts", d.candidate_counts},
                {"conflicts", conflicts},
                {"unassigned_gts", d.unassigned_gts},
                {"center_outside_gts", d.center_outside_gts},
                {"sinkhorn_residual", d.sinkhorn_residual ? Json(*d.sinkhorn_residual) : Json(nullptr)}}}};
}

Json loss_json(const LossBreakdown& l) {
  return Json{{"cls", l.cls}, {"obj", l.obj}, {"reg", l.reg}, {"total", l.total}, {"num_fg", l.num_fg}};
}

std::string trace_csv(const FitTrace& t) {
  std::string s = "step,cls,obj,reg,total,num_fg\n";
  for (std::size_t i = 0; i < t.losses.size(); ++i) {
    const auto& l = t.losses[i];
    s += std::to_string(i + 1) + "," + format_double(l.cls) + "," + format_double(l.obj) + "," +
         format_double(l.reg) + "," + format_double(l.total) + "," + std::to_string(l.num_fg) + "\n";
  }
  return s;
}

Json affine_json(const Affine2D& a) { return Json(a.m); }

// ---------------------------------------------------------------- commands

int cmd_assign(const Common& c, const std::string& scene_path, const std::optional<std::string>& pred_path,
               std::ostream& out) {
  const RunConfig cfg = resolve(c);
  const Scene scene = read_scene(scene_path);
  const FpnSpec spec = cfg.fpn.resolve(scene.height(), scene.width());
  const auto anchors = build_anchors(spec);
  const int nc = num_classes_for(cfg, scene);
  const auto preds = pred_path ? read_predictions(*pred_path)
                               : init_predictions(scene, anchors, nc, cfg.fit.init_noise, cfg.fit.prior_shift, cfg.seed);
  if (preds.size() != anchors.size())
    throw ValidationError("predictions: expected " + std::to_string(anchors.size()) + " entries, got " +
                          std::to_string(preds.size()));
  const auto result = run_assigner(cfg.fit.assigner, preds, anchors, scene.gts, spec, cfg.assigner);
  result.assignment.check_consistent();

  Json report{{"command", "assign"},
              {"config", echo(cfg)},
              {"scene_id", scene.id},
              {"assigner", to_string(cfg.fit.assigner)},
              {"predictions", pred_path ? "file" : "fit_init"},
              {"fpn", to_json(spec)},
              {"num_anchors", anchors.size()},
              {"num_gts", scene.gts.size()}};
  report.update(assignment_json(result, anchors));
  if (c.out.empty())
    out << report.dump(2) << "\n";
  else
    write_json_file(c.out, report);
  return kExitOk;
}

int cmd_ot_compare(const Common& c, const std::vector<std::string>& scene_paths, std::ostream& out) {
  const RunConfig cfg = resolve(c);
  const auto scenes = load_scenes(scene_paths);
  Json rows = Json::array();
  Json timings = Json::array();
  double agree_sum = 0.0, worst = 0.0;
  bool all_converged = true;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const auto& s = scenes[i];
    const FpnSpec spec = cfg.fpn.resolve(s.height(), s.width());
    const auto r = compare_ot(s, spec, cfg.assigner, cfg.sinkhorn, num_classes_for(cfg, s), cfg.fit.init_noise,
                              cfg.fit.prior_shift, cfg.seed + i);
    rows.push_back(Json{{"scene_id", s.id},
                        {"num_gts", s.gts.size()},
                        {"num_anchors", spec.num_anchors()},
                        {"agreement", r.agreement},
                        {"marginal_violation", r.violation},
                        {"converged", r.converged},
                        {"iterations", r.iterations},
                        {"simota_positives", r.simota_positives},
                        {"ot_positives", r.ot_positives}});
    timings.push_back(
        Json{{"scene_id", s.id}, {"simota_seconds", r.simota_seconds}, {"sinkhorn_seconds", r.sinkhorn_seconds}});
    agree_sum += r.agreement;
    worst = std::max(worst, r.violation);
    all_converged = all_converged && r.converged;
  }
  const Json report{{"command", "ot-compare"},
                    {"config", echo(cfg)},
                    {"scenes", rows},
                    {"summary",
                     {{"mean_agreement", scenes.empty() ? 0.0 : agree_sum / static_cast<double>(scenes.size())},
                      {"max_marginal_violation", worst},
                      {"all_converged", all_converged}}}};
  const Json timing_report{{"command", "ot-compare"}, {"threads", cfg.threads}, {"solvers", timings}};
  if (c.out.empty()) {
    out << report.dump(2) << "\n" << timing_report.dump(2) << "\n";
  } else {
    write_json_file(c.out, report);
    write_json_file(sidecar(c.out), timing_report);
  }
  return kExitOk;
}

int cmd_augment(const Common& c, const std::string& op, const std::vector<std::string>& scene_paths) {
  const RunConfig cfg = resolve(c);
  const fs::path dir = require_out(c, "DIR");
  const auto scenes = load_scenes(scene_paths);
  const std::size_t need = op == "mosaic" ? 4 : op == "mixup" ? 2 : 1;
  if (op != "mosaic" && op != "mixup" && op != "flip" && op != "jitter")
    throw ValidationError("--op must be mosaic, mixup, flip or jitter");
  if (scenes.size() != need)
    throw ValidationError("augment " + op + " needs exactly " + std::to_string(need) + " scene(s), got " +
                          std::to_string(scenes.size()));

  const SplitMix64 rng(cfg.seed);
  AugResult res;
  Json params;
  if (op == "mosaic") {
    const int h = cfg.augment_out_height.value_or(scenes[0].height());
    const int w = cfg.augment_out_width.value_or(scenes[0].width());
    MosaicParams p;
    res = mosaic(scenes, h, w, cfg.augment, rng, &p);
    params = Json{{"center_x", p.center_x}, {"center_y", p.center_y}, {"scales", p.scales},
                  {"crop_x", p.crop_x},     {"crop_y", p.crop_y},     {"out_height", h},
                  {"out_width", w}};
  } else if (op == "mixup") {
    if (!cfg.augment.mixup_enabled) throw ValidationError("augment mixup: mixup is disabled in the resolved config");
    MixupParams p;
    res = mixup(scenes[0], scenes[1], cfg.augment, rng, &p);
    params = Json{{"scale_a", p.scale_a}, {"scale_b", p.scale_b}, {"beta", p.beta}};
  } else if (op == "flip") {
    FlipParams p;
    res = hflip(scenes[0], cfg.augment, rng, &p);
    params = Json{{"flipped", p.flipped}};
  } else {
    JitterParams p;
    res = color_jitter(scenes[0], cfg.augment, rng, &p);
    params = Json{{"brightness", p.brightness}, {"contrast", p.contrast}};
  }

  write_scene(dir, "aug", res.scene);
  Json boxes = Json::array();
  for (std::size_t i = 0; i < res.provenance.size(); ++i) {
    const auto& pv = res.provenance[i];
    boxes.push_back(Json{{"source_scene", pv.source_scene},
                         {"source_box", pv.source_box},
                         {"affine", affine_json(pv.affine)},
                         {"box", box_to_json(res.scene.gts[i])}});
  }
  Json inputs = Json::array();
  for (const auto& s : scenes) inputs.push_back(s.id);
  write_json_file(dir / "transforms.json", Json{{"command", "augment"},
                                                {"op", op},
                                                {"config", echo(cfg)},
                                                {"inputs", inputs},
                                                {"params", params},
                                                {"pre_clip_count", res.pre_clip_count},
                                                {"boxes", boxes}});
  return kExitOk;
}

std::vector<Scene> fit_scenes(const RunConfig& cfg, const std::vector<std::string>& paths) {
  return paths.empty() ? generated_scenes(cfg) : load_scenes(paths);
}

int cmd_fit(const Common& c, const std::vector<std::string>& scene_paths, std::optional<int> steps) {
  RunConfig cfg = resolve(c);
  if (steps) cfg.fit.steps = *steps;
  cfg.fit.validate();
  const fs::path dir = require_out(c, "DIR");
  const auto scenes = fit_scenes(cfg, scene_paths);

  std::vector<FitTrace> traces(scenes.size());
  std::vector<FpnSpec> specs;
  for (const auto& s : scenes) specs.push_back(cfg.fpn.resolve(s.height(), s.width()));
  const auto t0 = std::chrono::steady_clock::now();
  parallel_for(scenes.size(), cfg.threads, [&](std::size_t i) {
    FitConfig fc = cfg.fit;
    fc.seed = cfg.seed + i;
    fc.assigner_cfg.threads = 1;  // scenes already run in parallel
    try {
      traces[i] = fit(scenes[i], specs[i], fc);
    } catch (const NumericError& e) {
      throw NumericError("scene " + scenes[i].id + ": " + e.what(), e.index());
    }
  });
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  Json runs = Json::array();
  int passed = 0;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const auto& t = traces[i];
    const std::string csv_name = "trace_" + std::to_string(i) + ".csv";
    write_text_file(dir / csv_name, trace_csv(t));
    Json dets = Json::array();
    for (const auto& d : t.detections) dets.push_back(detection_to_json(d));
    const bool ok = t.eval.ap50 == 1.0 && t.steps_to_threshold.has_value();
    passed += ok ? 1 : 0;
    runs.push_back(Json{{"scene_id", scenes[i].id},
                        {"seed", cfg.seed + i},
                        {"num_gts", scenes[i].gts.size()},
                        {"trace", csv_name},
                        {"trace_length", t.losses.size()},
                        {"final", loss_json(t.losses.back())},
                        {"steps_to_threshold", t.steps_to_threshold ? Json(*t.steps_to_threshold) : Json(nullptr)},
                        {"ap50", t.eval.ap50},
                        {"ap75", t.eval.ap75},
                        {"map", t.eval.map},
                        {"min_positive_iou", t.min_positive_iou},
                        {"postprocess", cfg.fit.assigner == AssignerKind::one_to_one ? "nms_free" : "nms"},
                        {"reassign_changes", t.reassign_changes},
                        {"detections", dets}});
  }
  write_json_file(dir / "summary.json", Json{{"command", "fit"},
                                             {"config", echo(cfg)},
                                             {"runs", runs},
                                             {"converged_runs", passed},
                                             {"total_runs", scenes.size()}});
  write_json_file(dir / "timings.json", Json{{"command", "fit"}, {"threads", cfg.threads}, {"wall_seconds", seconds}});
  return kExitOk;
}

int cmd_roadmap(const Common& c, const std::vector<std::string>& scene_paths) {
  const RunConfig cfg = resolve(c);
  const fs::path dir = require_out(c, "DIR");
  const auto scenes = fit_scenes(cfg, scene_paths);
  if (scenes.empty()) throw ValidationError("roadmap: no scenes");
  for (const auto& s : scenes)
    if (s.width() != scenes[0].width() || s.height() != scenes[0].height())
      throw ValidationError("roadmap: all scenes must share a canvas size");
  const FpnSpec spec = cfg.fpn.resolve(scenes[0].height(), scenes[0].width());

  const AssignerKind kinds[] = {AssignerKind::single_center, AssignerKind::multi3x3, AssignerKind::simota,
                                AssignerKind::one_to_one};
  std::vector<FitConfig> configs;
  for (auto k : kinds) {
    FitConfig fc = cfg.fit;
    fc.assigner = k;
    fc.seed = cfg.seed;
    fc.assigner_cfg.threads = 1;
    configs.push_back(fc);
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = roadmap_report(scenes, spec, configs, cfg.threads);
  const double fit_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::string csv = "assigner,mean_final_loss,mean_ap50,mean_steps_to_threshold,reached,scenes\n";
  Json jrows = Json::array();
  for (const auto& r : rows) {
    csv += std::string(to_string(r.assigner)) + "," + format_double(r.mean_final_loss) + "," +
           format_double(r.mean_ap50) + "," + format_double(r.mean_steps_to_threshold) + "," +
           std::to_string(r.reached) + "," + std::to_string(scenes.size()) + "\n";
    jrows.push_back(Json{{"assigner", to_string(r.assigner)},
                         {"postprocess", r.assigner == AssignerKind::one_to_one ? "nms_free" : "nms"},
                         {"mean_final_loss", r.mean_final_loss},
                         {"mean_ap50", r.mean_ap50},
                         {"mean_steps_to_threshold", r.mean_steps_to_threshold},
                         {"reached", r.reached},
                         {"steps_to_threshold", r.steps_to_threshold},
                         {"final_loss", r.final_loss},
                         {"ap50", r.ap50}});
  }
  int multi_le_single = 0;
  for (std::size_t s = 0; s < scenes.size(); ++s)
    multi_le_single += rows[1].steps_to_threshold[s] <= rows[0].steps_to_threshold[s] ? 1 : 0;

  Json ot_rows = Json::array();
  Json ot_timings = Json::array();
  double agree = 0.0;
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    const auto r = compare_ot(scenes[s], spec, cfg.assigner, cfg.sinkhorn, num_classes_for(cfg, scenes[s]),
                              cfg.fit.init_noise, cfg.fit.prior_shift, cfg.seed);
    agree += r.agreement;
    ot_rows.push_back(Json{{"scene_id", scenes[s].id},
                           {"agreement", r.agreement},
                           {"marginal_violation", r.violation},
                           {"converged", r.converged}});
    ot_timings.push_back(Json{
        {"scene_id", scenes[s].id}, {"simota_seconds", r.simota_seconds}, {"sinkhorn_seconds", r.sinkhorn_seconds}});
  }
  Json ids = Json::array();
  for (const auto& s : scenes) ids.push_back(s.id);

  write_text_file(dir / "roadmap.csv", csv);
  write_json_file(dir / "roadmap.json",
                  Json{{"command", "roadmap"},
                       {"config", echo(cfg)},
                       {"fpn", to_json(spec)},
                       {"scenes", ids},
                       {"rows", jrows},
                       {"paired", {{"multi3x3_steps_le_single_center", multi_le_single}, {"pairs", scenes.size()}}},
                       {"simota_vs_ot",
                        {{"mean_agreement", agree / static_cast<double>(scenes.size())}, {"per_scene", ot_rows}}}});
  write_json_file(dir / "timings.json", Json{{"command", "roadmap"},
                                             {"threads", cfg.threads},
                                             {"fit_wall_seconds", fit_seconds},
                                             {"solvers", ot_timings}});
  return kExitOk;
}

int cmd_eval(const Common& c, const std::string& input) {
  const RunConfig cfg = resolve(c);
  const fs::path dir = require_out(c, "DIR");
  const auto images = read_eval_input(input);
  const auto rep = mean_ap(images, cfg.eval_thresholds);
  std::string csv = "class,rank,recall,precision\n";
  Json per_class = Json::array();
  for (std::size_t k = 0; k < rep.curves50.size(); ++k) {
    per_class.push_back(Json{{"class_id", rep.classes[k]}, {"ap50", rep.curves50[k].ap}});
    for (std::size_t i = 0; i < rep.curves50[k].points.size(); ++i)
      csv += std::to_string(rep.classes[k]) + "," + std::to_string(i + 1) + "," +
             format_double(rep.curves50[k].points[i].first) + "," + format_double(rep.curves50[k].points[i].second) +
             "\n";
  }
  Json ap_t = Json::array();
  for (double v : rep.ap_per_threshold) ap_t.push_back(v);
  write_json_file(dir / "report.json", Json{{"command", "eval"},
                                            {"config", echo(cfg)},
                                            {"num_images", images.size()},
                                            {"map", rep.map},
                                            {"ap50", rep.ap50},
                                            {"ap75", rep.ap75},
                                            {"thresholds", rep.thresholds},
                                            {"ap_per_threshold", ap_t},
                                            {"classes", rep.classes},
                                            {"per_class", per_class}});
  write_text_file(dir / "pr_curves.csv", csv);
  return kExitOk;
}

int cmd_make_scenes(const Common& c, std::optional<int> count, std::optional<int> objects, std::optional<int> size) {
  RunConfig cfg = resolve(c);
  if (count) cfg.scenes.count = *count;
  if (objects) cfg.scenes.objects = *objects;
  if (size) cfg.scenes.gen.size = *size;
  if (cfg.scenes.count < 0 || cfg.scenes.objects < 0) throw ValidationError("--count and --objects must be >= 0");
  const fs::path dir = require_out(c, "DIR");
  const auto scenes = generated_scenes(cfg);
  Json index = Json::array();
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const std::string stem = "scene_" + std::to_string(i);
    write_scene(dir, stem, scenes[i]);
    index.push_back(stem + ".json");
  }
  write_json_file(dir / "index.json", Json{{"command", "make-scenes"}, {"config", echo(cfg)}, {"scenes", index}});
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"simota_kit: label assignment, losses, augmentation and evaluation for anchor-free detectors"};
  app.require_subcommand(1);
  Common common;

  std::string scene;
  std::vector<std::string> scenes;
  std::optional<std::string> predictions;
  std::string op;
  std::string detections;
  std::optional<int> steps, count, objects, size;

  auto* assign = app.add_subcommand("assign", "Run one assigner on a scene and write the assignment report");
  add_common(assign, common, true);
  assign->add_option("--scene", scene, "Scene JSON")->required();
  assign->add_option("--predictions", predictions, "Predictions JSON (default: seeded fit initialisation)");

  auto* ot = app.add_subcommand("ot-compare", "SimOTA vs Sinkhorn OT on identical cost matrices");
  add_common(ot, common, false);
  ot->add_option("--scene", scenes, "Scene JSON (repeatable)")->required();

  auto* aug = app.add_subcommand("augment", "Apply one augmentation and record its transforms");
  add_common(aug, common, false);
  aug->add_option("--op", op, "mosaic | mixup | flip | jitter")->required();
  aug->add_option("--scene", scenes, "Scene JSON (4 for mosaic, 2 for mixup, else 1)")->required();

  auto* fitc = app.add_subcommand("fit", "Optimise predictions directly through assign and loss");
  add_common(fitc, common, true);
  fitc->add_option("--scene", scenes, "Scene JSON (repeatable; default: generated scene set)");
  fitc->add_option("--steps", steps, "Override fit.steps");

  auto* road = app.add_subcommand("roadmap", "Fit every assigner on a common scene set");
  add_common(road, common, false);
  road->add_option("--scene", scenes, "Scene JSON (repeatable; default: generated scene set)");

  auto* ev = app.add_subcommand("eval", "AP / mAP of detections against gts");
  add_common(ev, common, false);
  ev->add_option("--detections", detections, "Evaluation input JSON")->required();

  auto* mk = app.add_subcommand("make-scenes", "Write a seeded synthetic scene set");
  add_common(mk, common, false);
  mk->add_option("--count", count, "Number of scenes");
  mk->add_option("--objects", objects, "Objects per scene");
  mk->add_option("--size", size, "Canvas side in pixels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (assign->parsed()) return cmd_assign(common, scene, predictions, out);
    if (ot->parsed()) return cmd_ot_compare(common, scenes, out);
    if (aug->parsed()) return cmd_augment(common, op, scenes);
    if (fitc->parsed()) return cmd_fit(common, scenes, steps);
    if (road->parsed()) return cmd_roadmap(common, scenes);
    if (ev->parsed()) return cmd_eval(common, detections);
    if (mk->parsed()) return cmd_make_scenes(common, count, objects, size);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what();
    if (e.index()) err << " (index " << *e.index() << ")";
    err << "\n";
    return kExitNumeric;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitValidation;
}

}  // namespace simota::cli
