#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "simota/geometry.hpp"
#include "simota/gridhead.hpp"

namespace simota {

struct Detection {
  BBox box;
  int class_id = 0;
  double score = 0.0;  // obj_prob * cls_prob
  std::size_t anchor_index = 0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Ranking used everywhere: higher score first, then lower anchor index.
bool ranks_before(const Detection& a, const Detection& b) noexcept;

/// Keep score > threshold, order preserved.
std::vector<Detection> score_filter(std::span<const Detection> dets, double threshold);

/// Class-wise greedy NMS. Output is ordered by ranks_before.
std::vector<Detection> nms_greedy(std::span<const Detection> dets, double iou_threshold);

/// Literal O(n^2) restatement of greedy NMS: repeatedly scan for the best
/// remaining detection, keep it, drop same-class detections overlapping it.
std::vector<Detection> nms_reference(std::span<const Detection> dets, double iou_threshold);

/// Decode every anchor and take its best class (ties: lower class id).
std::vector<Detection> decode_detections(std::span<const RawPrediction> preds, std::span<const AnchorPoint> anchors);

/// NMS-free output path: best class per anchor plus score_filter, nothing else.
std::vector<Detection> decode_nmsfree(std::span<const RawPrediction> preds, std::span<const AnchorPoint> anchors,
                                      double score_threshold);

/// Standard path: decode, score_filter, nms_greedy.
std::vector<Detection> decode_with_nms(std::span<const RawPrediction> preds, std::span<const AnchorPoint> anchors,
                                       double score_threshold, double iou_threshold);

}  // namespace simota
