#include "simota/synthfit.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "simota/errors.hpp"
#include "simota/parallel.hpp"
#include "simota/rng.hpp"

namespace simota {

const char* to_string(AssignerKind k) noexcept {
  switch (k) {
    case AssignerKind::single_center: return "single_center";
    case AssignerKind::multi3x3: return "multi3x3";
    case AssignerKind::simota: return "simota";
    case AssignerKind::one_to_one: return "one_to_one";
  }
  return "?";
}

AssignerKind parse_assigner(const std::string& name) {
  for (auto k : {AssignerKind::single_center, AssignerKind::multi3x3, AssignerKind::simota, AssignerKind::one_to_one})
    if (name == to_string(k)) return k;
  throw ValidationError("unknown assigner '" + name + "' (single_center|multi3x3|simota|one_to_one)");
}

const char* to_string(OptimizerKind k) noexcept { return k == OptimizerKind::gd ? "gd" : "adam"; }

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "gd") return OptimizerKind::gd;
  if (name == "adam") return OptimizerKind::adam;
  throw ValidationError("unknown optimizer '" + name + "' (gd|adam)");
}

namespace {

constexpr std::array<std::array<std::uint8_t, 3>, 8> kPalette{{{220, 40, 40},
                                                               {40, 200, 60},
                                                               {50, 90, 230},
                                                               {230, 200, 40},
                                                               {200, 60, 200},
                                                               {40, 210, 210},
                                                               {250, 140, 30},
                                                               {150, 150, 250}}};
constexpr std::uint8_t kSceneBackground = 64;
constexpr int kOverlapAttempts = 100;
constexpr double kFarLogit = -4.0;
constexpr double kNearRadius = 2.5;  // strides

}  // namespace

Scene make_scene(std::uint64_t seed, int n_objects, const SceneGenConfig& cfg) {
  if (n_objects < 0) throw ValidationError("make_scene: n_objects must be >= 0");
  if (cfg.size < 32) throw ValidationError("make_scene: size must be >= 32");
  if (cfg.num_classes < 1) throw ValidationError("make_scene: num_classes must be >= 1");

  Scene scene;
  scene.id = "synth-" + std::to_string(seed);
  scene.image = Image(cfg.size, cfg.size, kSceneBackground);
  const double size = cfg.size;
  const double max_side = size / 2.0;

  SplitMix64 root(seed);
  auto rng = root.child("scene.objects");
  for (int n = 0; n < n_objects; ++n) {
    LabeledBox obj;
    for (int attempt = 0; attempt < kOverlapAttempts; ++attempt) {
      // Fixed draw count per attempt.
      const double w = rng.uniform(8.0, max_side);
      const double h = rng.uniform(8.0, max_side);
      const double cx = rng.uniform(4.0, size - 4.0);
      const double cy = rng.uniform(4.0, size - 4.0);
      const int cls = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.num_classes)));
      const auto clipped = clip_to_canvas(BBox{cx, cy, w, h}, size, size, ClipConfig{});
      if (!clipped) continue;
      obj = {*clipped, cls};
      bool crowded = false;
      for (const auto& g : scene.gts)
        if (iou(g.box, obj.box) > cfg.max_overlap_iou) crowded = true;
      if (!crowded) break;
    }
    if (!obj.box.valid()) continue;
    scene.gts.push_back(obj);
  }

  for (const auto& g : scene.gts) {
    const auto& color = kPalette[static_cast<std::size_t>(g.class_id) % kPalette.size()];
    const int x0 = std::max(0, static_cast<int>(std::floor(g.box.x1() + 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::floor(g.box.y1() + 0.5)));
    const int x1 = std::min(cfg.size, static_cast<int>(std::floor(g.box.x2() + 0.5)));
    const int y1 = std::min(cfg.size, static_cast<int>(std::floor(g.box.y2() + 0.5)));
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x)
        for (int c = 0; c < 3; ++c) scene.image.at(x, y, c) = color[static_cast<std::size_t>(c)];
  }
  return scene;
}

void FitConfig::validate() const {
  if (steps < 1) throw ValidationError("fit.steps must be >= 1");
  // 0 is accepted so the optimizer can be switched off.
  if (!(step_size >= 0.0) || !std::isfinite(step_size)) throw ValidationError("fit.step_size must be >= 0");
  if (reassign_every < 1) throw ValidationError("fit.reassign_every must be >= 1");
  if (!(init_noise >= 0.0) || !std::isfinite(init_noise)) throw ValidationError("fit.init_noise must be >= 0");
  if (!(prior_shift >= 0.0 && prior_shift < 1.0)) throw ValidationError("fit.prior_shift must be in [0, 1)");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) throw ValidationError("fit.adam_beta1 must be in [0, 1)");
  if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) throw ValidationError("fit.adam_beta2 must be in [0, 1)");
  if (!(score_threshold >= 0.0 && score_threshold <= 1.0))
    throw ValidationError("fit.score_threshold must be in [0, 1]");
  if (!(nms_iou > 0.0 && nms_iou < 1.0)) throw ValidationError("fit.nms_iou must be in (0, 1)");
  if (num_classes < 0) throw ValidationError("fit.num_classes must be >= 0");
  assigner_cfg.validate();
}

int infer_num_classes(const Scene& scene) {
  int c = 1;
  for (const auto& g : scene.gts) c = std::max(c, g.class_id + 1);
  return c;
}

std::vector<RawPrediction> init_predictions(const Scene& scene, std::span<const AnchorPoint> anchors, int num_classes,
                                            double init_noise, double prior_shift, std::uint64_t seed) {
  if (num_classes < 1) throw ValidationError("init_predictions: num_classes must be >= 1");
  auto rng = SplitMix64(seed).child("fit.init");
  std::vector<RawPrediction> preds(anchors.size());
  for (std::size_t j = 0; j < anchors.size(); ++j) {
    const auto& a = anchors[j];
    std::array<double, 4> nt{};
    for (double& v : nt) v = rng.normal();
    const double nobj = rng.normal();
    std::vector<double> ncls(static_cast<std::size_t>(num_classes));
    for (double& v : ncls) v = rng.normal();

    const double ax = a.center_x();
    const double ay = a.center_y();
    const LabeledBox* near = nullptr;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& g : scene.gts) {
      const double d = std::hypot(g.box.cx - ax, g.box.cy - ay);
      if (d < kNearRadius * a.stride && d < best) {
        best = d;
        near = &g;
      }
    }

    auto& p = preds[j];
    p.cls_logits.assign(static_cast<std::size_t>(num_classes), kFarLogit);
    if (near) {
      const BBox prior{near->box.cx + prior_shift * (ax - near->box.cx), near->box.cy + prior_shift * (ay - near->box.cy),
                       near->box.w, near->box.h};
      p.t = encode(prior, a);
      for (std::size_t i = 0; i < 4; ++i) p.t[i] += init_noise * nt[i];
      p.obj_logit = init_noise * nobj;
      for (std::size_t c = 0; c < ncls.size(); ++c) p.cls_logits[c] = init_noise * ncls[c];
    } else {
      p.t = {0.5, 0.5, 0.0, 0.0};
      p.obj_logit = kFarLogit;
    }
  }
  return preds;
}

namespace {

std::vector<DecodedPrediction> decode_all(std::span<const RawPrediction> preds, std::span<const AnchorPoint> anchors) {
  std::vector<DecodedPrediction> out;
  out.reserve(preds.size());
  for (std::size_t j = 0; j < preds.size(); ++j) out.push_back(decode(preds[j], anchors[j]));
  return out;
}

}  // namespace

AssignResult run_assigner(AssignerKind kind, std::span<const RawPrediction> preds,
                          std::span<const AnchorPoint> anchors, std::span<const LabeledBox> gts, const FpnSpec& spec,
                          const AssignerConfig& cfg) {
  switch (kind) {
    case AssignerKind::single_center: return single_center_assign(gts, anchors, spec);
    case AssignerKind::multi3x3: return multi_center_assign(gts, anchors, spec);
    case AssignerKind::simota: {
      const auto decoded = decode_all(preds, anchors);
      return simota_assign(cost_matrix(decoded, anchors, gts, cfg), cfg);
    }
    case AssignerKind::one_to_one: {
      const auto decoded = decode_all(preds, anchors);
      return one_to_one_assign(cost_matrix(decoded, anchors, gts, cfg));
    }
  }
  throw ValidationError("run_assigner: unknown assigner");
}

namespace {

struct Optimizer {
  static constexpr double kEps = 1e-8;

  const FitConfig& cfg;
  std::vector<double> m, v;
  double b1t = 1.0, b2t = 1.0;

  double rate(int step) const {
    if (!cfg.cosine_decay) return cfg.step_size;
    return cfg.step_size * 0.5 * (1.0 + std::cos(std::numbers::pi * (step - 1) / cfg.steps));
  }

  void apply(std::vector<double>& params, const std::vector<double>& grad, int step) {
    const double lr = rate(step);
    if (cfg.optimizer == OptimizerKind::gd) {
      for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad[i];
      return;
    }
    if (m.empty()) {
      m.assign(params.size(), 0.0);
      v.assign(params.size(), 0.0);
    }
    const double b1 = cfg.adam_beta1;
    const double b2 = cfg.adam_beta2;
    b1t *= b1;
    b2t *= b2;
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
      v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
      const double mh = m[i] / (1.0 - b1t);
      const double vh = v[i] / (1.0 - b2t);
      params[i] -= lr * mh / (std::sqrt(vh) + kEps);
    }
  }
};

std::vector<double> flat_grad(const GradientSet& g) { return from_predictions(g.d); }

}  // namespace

FitTrace fit(const Scene& scene, const FpnSpec& spec, const FitConfig& cfg) {
  cfg.validate();
  spec.validate();
  scene.validate();
  const int num_classes = cfg.num_classes > 0 ? cfg.num_classes : infer_num_classes(scene);
  for (const auto& g : scene.gts)
    if (g.class_id >= num_classes) throw ValidationError("fit: gt class_id exceeds num_classes");

  const auto anchors = build_anchors(spec);
  auto preds = init_predictions(scene, anchors, num_classes, cfg.init_noise, cfg.prior_shift, cfg.seed);
  auto params = from_predictions(preds);
  Optimizer opt{cfg, {}, {}};

  FitTrace trace;
  trace.losses.reserve(static_cast<std::size_t>(cfg.steps));
  Assignment assignment;
  TargetSet targets;
  for (int step = 1; step <= cfg.steps; ++step) {
    try {
      if ((step - 1) % cfg.reassign_every == 0) {
        auto next = run_assigner(cfg.assigner, preds, anchors, scene.gts, spec, cfg.assigner_cfg).assignment;
        if (step > 1) {
          std::size_t changed = 0;
          for (std::size_t j = 0; j < next.anchor_labels.size(); ++j)
            changed += next.anchor_labels[j] != assignment.anchor_labels[j] ? 1 : 0;
          trace.reassign_changes.push_back(changed);
        }
        assignment = std::move(next);
        targets = build_targets(assignment, scene.gts);
      }
      auto [lb, grads] = total_loss(preds, anchors, targets, cfg.weights);
      if (!std::isfinite(lb.total)) throw NumericError("non-finite loss");
      trace.losses.push_back(lb);
      opt.apply(params, flat_grad(grads), step);
      for (double p : params)
        if (!std::isfinite(p)) throw NumericError("non-finite parameter");
      preds = to_predictions(params, num_classes);
    } catch (const NumericError& e) {
      throw NumericError("fit: step " + std::to_string(step) + ": " + e.what(), static_cast<std::size_t>(step));
    }
  }

  for (std::size_t s = 0; s < trace.losses.size(); ++s)
    if (trace.losses[s].total < cfg.loss_threshold) {
      trace.steps_to_threshold = static_cast<int>(s) + 1;
      break;
    }

  trace.detections = cfg.assigner == AssignerKind::one_to_one
                         ? decode_nmsfree(preds, anchors, cfg.score_threshold)
                         : decode_with_nms(preds, anchors, cfg.score_threshold, cfg.nms_iou);
  const EvalImage im{trace.detections, scene.gts};
  trace.eval = mean_ap(std::span<const EvalImage>(&im, 1));

  // Final assignment: the one in force for the last step.
  for (std::size_t j = 0; j < assignment.anchor_labels.size(); ++j) {
    const int g = assignment.anchor_labels[j];
    if (g == kBackground) continue;
    const double ov = iou(decode_box(preds[j].t, anchors[j]), scene.gts[static_cast<std::size_t>(g)].box);
    trace.min_positive_iou = std::min(trace.min_positive_iou, ov);
  }
  trace.final_predictions = std::move(preds);
  trace.final_assignment = std::move(assignment);
  return trace;
}

std::vector<RoadmapRow> roadmap_report(std::span<const Scene> scenes, const FpnSpec& spec,
                                       std::span<const FitConfig> configs, unsigned threads) {
  for (const auto& c : configs) c.validate();
  const std::size_t n = scenes.size();
  std::vector<RoadmapRow> rows(configs.size());
  for (std::size_t c = 0; c < configs.size(); ++c) {
    rows[c].assigner = configs[c].assigner;
    rows[c].steps_to_threshold.assign(n, 0);
    rows[c].final_loss.assign(n, 0.0);
    rows[c].ap50.assign(n, 0.0);
  }
  parallel_for(configs.size() * n, threads, [&](std::size_t job) {
    const std::size_t c = job / n;
    const std::size_t s = job % n;
    const auto tr = fit(scenes[s], spec, configs[c]);
    rows[c].steps_to_threshold[s] = tr.steps_to_threshold.value_or(configs[c].steps + 1);
    rows[c].final_loss[s] = tr.losses.back().total;
    rows[c].ap50[s] = tr.eval.ap50;
  });
  for (std::size_t c = 0; c < configs.size(); ++c) {
    auto& r = rows[c];
    if (n == 0) continue;
    double loss = 0.0, ap = 0.0, steps = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      loss += r.final_loss[s];
      ap += r.ap50[s];
      steps += r.steps_to_threshold[s];
      r.reached += r.steps_to_threshold[s] <= configs[c].steps ? 1 : 0;
    }
    r.mean_final_loss = loss / static_cast<double>(n);
    r.mean_ap50 = ap / static_cast<double>(n);
    r.mean_steps_to_threshold = steps / static_cast<double>(n);
  }
  return rows;
}

OtComparison compare_ot(const Scene& scene, const FpnSpec& spec, const AssignerConfig& acfg,
                        const SinkhornOptions& sopts, int num_classes, double init_noise, double prior_shift,
                        std::uint64_t seed) {
  using Clock = std::chrono::steady_clock;
  const auto anchors = build_anchors(spec);
  const auto preds = init_predictions(scene, anchors, num_classes, init_noise, prior_shift, seed);
  const auto cm = cost_matrix(decode_all(preds, anchors), anchors, scene.gts, acfg);

  OtComparison out;
  const auto t0 = Clock::now();
  const auto sim = simota_assign(cm, acfg);
  const auto t1 = Clock::now();
  const auto plan = sinkhorn_ot(cm, sim.assignment.k_values, sopts);
  const auto ot = plan_to_assignment(plan);
  const auto t2 = Clock::now();

  out.agreement = agreement_rate(sim.assignment, ot);
  out.violation = plan.violation;
  out.converged = plan.converged;
  out.iterations = plan.iterations;
  out.simota_positives = sim.assignment.num_positives();
  out.ot_positives = ot.num_positives();
  out.simota_seconds = std::chrono::duration<double>(t1 - t0).count();
  out.sinkhorn_seconds = std::chrono::duration<double>(t2 - t1).count();
  return out;
}

}  // namespace simota
