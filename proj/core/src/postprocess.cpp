#include "simota/postprocess.hpp"

#include <algorithm>
#include <map>

#include "simota/errors.hpp"

namespace simota {

bool ranks_before(const Detection& a, const Detection& b) noexcept {
  return a.score > b.score || (a.score == b.score && a.anchor_index < b.anchor_index);
}

std::vector<Detection> score_filter(std::span<const Detection> dets, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ValidationError("score_filter: threshold must be in [0, 1]");
  std::vector<Detection> out;
  for (const auto& d : dets)
    if (d.score > threshold) out.push_back(d);
  return out;
}

namespace {

void check_iou_threshold(double t) {
  if (!(t > 0.0 && t < 1.0)) throw ValidationError("nms: iou_threshold must be in (0, 1)");
}

}  // namespace

std::vector<Detection> nms_greedy(std::span<const Detection> dets, double iou_threshold) {
  check_iou_threshold(iou_threshold);
  std::map<int, std::vector<Detection>> by_class;
  for (const auto& d : dets) by_class[d.class_id].push_back(d);

  std::vector<Detection> kept;
  for (auto& [cls, group] : by_class) {
    std::sort(group.begin(), group.end(), ranks_before);
    std::vector<char> dead(group.size(), 0);
    for (std::size_t i = 0; i < group.size(); ++i) {
      if (dead[i]) continue;
      kept.push_back(group[i]);
      for (std::size_t j = i + 1; j < group.size(); ++j)
        if (!dead[j] && iou(group[i].box, group[j].box) > iou_threshold) dead[j] = 1;
    }
  }
  std::sort(kept.begin(), kept.end(), ranks_before);
  return kept;
}

std::vector<Detection> nms_reference(std::span<const Detection> dets, double iou_threshold) {
  check_iou_threshold(iou_threshold);
  std::vector<char> alive(dets.size(), 1);
  std::vector<Detection> kept;
  for (;;) {
    std::size_t best = dets.size();
    for (std::size_t i = 0; i < dets.size(); ++i)
      if (alive[i] && (best == dets.size() || ranks_before(dets[i], dets[best]))) best = i;
    if (best == dets.size()) break;
    kept.push_back(dets[best]);
    alive[best] = 0;
    for (std::size_t i = 0; i < dets.size(); ++i)
      if (alive[i] && dets[i].class_id == dets[best].class_id && iou(dets[best].box, dets[i].box) > iou_threshold)
        alive[i] = 0;
  }
  return kept;
}

std::vector<Detection> decode_detections(std::span<const RawPrediction> preds, std::span<const AnchorPoint> anchors) {
  if (preds.size() != anchors.size()) throw ValidationError("decode: predictions and anchors differ in length");
  std::vector<Detection> out;
  out.reserve(preds.size());
  for (std::size_t j = 0; j < preds.size(); ++j) {
    const auto d = decode(preds[j], anchors[j]);
    if (d.cls_probs.empty()) throw ValidationError("decode: prediction without class scores");
    const auto best = static_cast<std::size_t>(
        std::distance(d.cls_probs.begin(), std::max_element(d.cls_probs.begin(), d.cls_probs.end())));
    out.push_back({d.box, static_cast<int>(best), d.obj_prob * d.cls_probs[best], j});
  }
  return out;
}

std::vector<Detection> decode_nmsfree(std::span<const RawPrediction> preds, std::span<const AnchorPoint> anchors,
                                      double score_threshold) {
  return score_filter(decode_detections(preds, anchors), score_threshold);
}

std::vector<Detection> decode_with_nms(std::span<const RawPrediction> preds, std::span<const AnchorPoint> anchors,
                                       double score_threshold, double iou_threshold) {
  return nms_greedy(score_filter(decode_detections(preds, anchors), score_threshold), iou_threshold);
}

}  // namespace simota
