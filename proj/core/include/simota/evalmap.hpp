#pragma once

#include <span>
#include <utility>
#include <vector>

#include "simota/geometry.hpp"
#include "simota/postprocess.hpp"

namespace simota {

struct PRCurve {
  std::vector<std::pair<double, double>> points;  // (recall, precision), one per detection
  double ap = 0.0;
};

/// Greedy matching in the given order (callers sort by score): each
/// detection takes the unmatched same-class gt with the highest IoU >=
/// threshold (ties: lower gt index) and is a TP, otherwise a FP.
std::vector<bool> match_detections(std::span<const Detection> dets, std::span<const LabeledBox> gts,
                                   double iou_threshold);

/// All-point interpolated AP: precision envelope made non-increasing, then
/// integrated over recall. num_gts == 0 gives ap = 0.
PRCurve average_precision(const std::vector<bool>& tp_flags, std::size_t num_gts);

struct EvalImage {
  std::vector<Detection> dets;
  std::vector<LabeledBox> gts;
};

struct MapReport {
  std::vector<double> thresholds;
  std::vector<double> ap_per_threshold;  // mean over classes with gts
  std::vector<int> classes;              // classes that have gts
  double map = 0.0;
  double ap50 = 0.0;
  double ap75 = 0.0;
  /// Per-class PR curves at IoU 0.5, parallel to `classes`.
  std::vector<PRCurve> curves50;
};

/// 0.50, 0.55, ..., 0.95
std::vector<double> coco_thresholds();

/// Mean over classes (those with at least one gt), then over thresholds.
/// No per-image detection cap and no size breakdown.
MapReport mean_ap(std::span<const EvalImage> images, std::span<const double> thresholds);
MapReport mean_ap(std::span<const EvalImage> images);

}  // namespace simota
