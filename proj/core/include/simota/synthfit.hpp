#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "simota/assigner.hpp"
#include "simota/evalmap.hpp"
#include "simota/gridhead.hpp"
#include "simota/image.hpp"
#include "simota/losses.hpp"
#include "simota/postprocess.hpp"

namespace simota {

enum class AssignerKind { single_center, multi3x3, simota, one_to_one };
enum class OptimizerKind { gd, adam };

const char* to_string(AssignerKind k) noexcept;
/// Throws ValidationError on an unknown name.
AssignerKind parse_assigner(const std::string& name);
const char* to_string(OptimizerKind k) noexcept;
OptimizerKind parse_optimizer(const std::string& name);

struct SceneGenConfig {
  int size = 128;
  int num_classes = 3;
  /// Rejection-sample new objects whose IoU with an earlier one exceeds this.
  double max_overlap_iou = 0.3;
};

/// Flat background with one solid rectangle per gt; sides in [8, size/2],
/// centers at least 4 px inside the canvas, boxes clipped to the canvas.
Scene make_scene(std::uint64_t seed, int n_objects, const SceneGenConfig& cfg = {});

struct FitConfig {
  int steps = 500;
  double step_size = 0.05;
  AssignerKind assigner = AssignerKind::simota;
  int reassign_every = 10;
  double init_noise = 0.1;
  /// Prior center = gt center + prior_shift * (cell center - gt center).
  double prior_shift = 0.0;
  std::uint64_t seed = 0;
  /// gd is the literal update p -= step_size * grad; adam rescales it per
  /// parameter (see the README for why it is the default).
  OptimizerKind optimizer = OptimizerKind::adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.95;
  /// Cosine decay of the step size from step_size to 0 over `steps`.
  bool cosine_decay = true;
  double loss_threshold = 0.05;  // for steps-to-threshold
  double score_threshold = 0.1;
  double nms_iou = 0.65;
  AssignerConfig assigner_cfg{};
  LossWeights weights{};
  int num_classes = 0;  // 0: infer from the scene

  void validate() const;
};

struct FitTrace {
  std::vector<LossBreakdown> losses;  // one per step, before that step's update
  std::vector<std::size_t> reassign_changes;  // anchors relabelled at each reassignment
  std::vector<Detection> detections;
  MapReport eval;
  std::optional<int> steps_to_threshold;  // 1-based
  /// Smallest IoU between a final positive's decoded box and its gt (1 when none).
  double min_positive_iou = 1.0;
  std::vector<RawPrediction> final_predictions;
  Assignment final_assignment;
};

/// Near-object initialisation. Anchors whose cell center is within 2.5
/// strides of a gt center start from a prior with the gt's size, centered
/// prior_shift of the way from the gt center to the cell center, plus
/// init_noise gaussians; others
/// start at a stride-sized box with obj/cls logits of -4. Every anchor draws
/// 5 + C normals from child stream "fit.init" whichever branch it takes.
std::vector<RawPrediction> init_predictions(const Scene& scene, std::span<const AnchorPoint> anchors, int num_classes,
                                            double init_noise, double prior_shift, std::uint64_t seed);

AssignResult run_assigner(AssignerKind kind, std::span<const RawPrediction> preds,
                          std::span<const AnchorPoint> anchors, std::span<const LabeledBox> gts, const FpnSpec& spec,
                          const AssignerConfig& cfg);

/// Gradient descent directly on the prediction tensor through
/// assign -> build_targets -> total_loss. Throws NumericError carrying the
/// 1-based step index on a non-finite loss.
FitTrace fit(const Scene& scene, const FpnSpec& spec, const FitConfig& cfg);

struct RoadmapRow {
  AssignerKind assigner{};
  double mean_final_loss = 0.0;
  double mean_ap50 = 0.0;
  /// Unreached seeds count as steps + 1.
  double mean_steps_to_threshold = 0.0;
  int reached = 0;
  std::vector<int> steps_to_threshold;  // per scene, steps + 1 when unreached
  std::vector<double> final_loss;
  std::vector<double> ap50;
};

/// Fits every scene under every config (common seeds), optionally on
/// `threads` workers. Rows follow `configs` order.
std::vector<RoadmapRow> roadmap_report(std::span<const Scene> scenes, const FpnSpec& spec,
                                       std::span<const FitConfig> configs, unsigned threads = 1);

struct OtComparison {
  double agreement = 0.0;
  double violation = 0.0;
  bool converged = false;
  int iterations = 0;
  std::size_t simota_positives = 0;
  std::size_t ot_positives = 0;
  double simota_seconds = 0.0;  // wall time, informational
  double sinkhorn_seconds = 0.0;
};

/// SimOTA and Sinkhorn + argmax decoding on one cost matrix built from
/// init_predictions(scene).
OtComparison compare_ot(const Scene& scene, const FpnSpec& spec, const AssignerConfig& acfg,
                        const SinkhornOptions& sopts, int num_classes, double init_noise, double prior_shift,
                        std::uint64_t seed);

int infer_num_classes(const Scene& scene);

}  // namespace simota
