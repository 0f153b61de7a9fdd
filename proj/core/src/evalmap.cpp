#include "simota/evalmap.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "simota/errors.hpp"

namespace simota {

std::vector<bool> match_detections(std::span<const Detection> dets, std::span<const LabeledBox> gts,
                                   double iou_threshold) {
  std::vector<bool> flags(dets.size(), false);
  std::vector<char> used(gts.size(), 0);
  for (std::size_t d = 0; d < dets.size(); ++d) {
    std::size_t best = gts.size();
    double best_iou = -1.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (used[g] || gts[g].class_id != dets[d].class_id) continue;
      const double ov = iou(dets[d].box, gts[g].box);
      if (ov >= iou_threshold && ov > best_iou) {
        best_iou = ov;
        best = g;
      }
    }
    if (best < gts.size()) {
      used[best] = 1;
      flags[d] = true;
    }
  }
  return flags;
}

PRCurve average_precision(const std::vector<bool>& tp_flags, std::size_t num_gts) {
  PRCurve curve;
  if (num_gts == 0) return curve;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < tp_flags.size(); ++k) {
    tp += tp_flags[k] ? 1 : 0;
    curve.points.emplace_back(static_cast<double>(tp) / static_cast<double>(num_gts),
                              static_cast<double>(tp) / static_cast<double>(k + 1));
  }
  std::vector<double> envelope(curve.points.size());
  double running = 0.0;
  for (std::size_t k = curve.points.size(); k-- > 0;) {
    running = std::max(running, curve.points[k].second);
    envelope[k] = running;
  }
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < curve.points.size(); ++k) {
    const double r = curve.points[k].first;
    if (r > prev_recall) {
      curve.ap += (r - prev_recall) * envelope[k];
      prev_recall = r;
    }
  }
  return curve;
}

std::vector<double> coco_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back((50 + 5 * i) / 100.0);
  return t;
}

MapReport mean_ap(std::span<const EvalImage> images) {
  const auto t = coco_thresholds();
  return mean_ap(images, t);
}

MapReport mean_ap(std::span<const EvalImage> images, std::span<const double> thresholds) {
  MapReport rep;
  rep.thresholds.assign(thresholds.begin(), thresholds.end());
  std::set<int> classes;
  for (const auto& im : images)
    for (const auto& g : im.gts) classes.insert(g.class_id);
  rep.classes.assign(classes.begin(), classes.end());
  rep.ap_per_threshold.assign(thresholds.size(), 0.0);

  for (int cls : rep.classes) {
    // Per-class detections across images, ranked by score then image then anchor.
    struct Ranked {
      double score;
      std::size_t image;
      std::size_t anchor;
      std::size_t pos;
    };
    std::vector<Ranked> ranked;
    std::vector<std::vector<Detection>> img_dets(images.size());
    std::vector<std::vector<LabeledBox>> img_gts(images.size());
    std::size_t num_gts = 0;
    for (std::size_t i = 0; i < images.size(); ++i) {
      for (const auto& g : images[i].gts)
        if (g.class_id == cls) img_gts[i].push_back(g);
      num_gts += img_gts[i].size();
      for (const auto& d : images[i].dets)
        if (d.class_id == cls) img_dets[i].push_back(d);
      std::sort(img_dets[i].begin(), img_dets[i].end(), ranks_before);
      for (std::size_t k = 0; k < img_dets[i].size(); ++k)
        ranked.push_back({img_dets[i][k].score, i, img_dets[i][k].anchor_index, k});
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.image != b.image) return a.image < b.image;
      return a.pos < b.pos;
    });

    for (std::size_t ti = 0; ti < thresholds.size(); ++ti) {
      // Within one image the ranked order restricted to it is the sorted
      // per-image order, so per-image greedy matching is equivalent.
      std::vector<std::vector<bool>> per_image(images.size());
      for (std::size_t i = 0; i < images.size(); ++i)
        per_image[i] = match_detections(img_dets[i], img_gts[i], thresholds[ti]);
      std::vector<bool> flags;
      flags.reserve(ranked.size());
      for (const auto& r : ranked) flags.push_back(per_image[r.image][r.pos]);
      const auto curve = average_precision(flags, num_gts);
      rep.ap_per_threshold[ti] += curve.ap;
      if (thresholds[ti] == 0.5) rep.curves50.push_back(curve);
    }
  }
  if (!rep.classes.empty())
    for (double& v : rep.ap_per_threshold) v /= static_cast<double>(rep.classes.size());
  if (!rep.ap_per_threshold.empty())
    rep.map = std::accumulate(rep.ap_per_threshold.begin(), rep.ap_per_threshold.end(), 0.0) /
              static_cast<double>(rep.ap_per_threshold.size());
  for (std::size_t ti = 0; ti < thresholds.size(); ++ti) {
    if (thresholds[ti] == 0.5) rep.ap50 = rep.ap_per_threshold[ti];
    if (thresholds[ti] == 0.75) rep.ap75 = rep.ap_per_threshold[ti];
  }
  return rep;
}

}  // namespace simota
