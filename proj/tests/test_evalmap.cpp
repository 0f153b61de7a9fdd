#include <gtest/gtest.h>

#include <cmath>

#include "oracles/oracles.hpp"
#include "simota/evalmap.hpp"

using namespace simota;

namespace {

struct Instance {
  std::vector<EvalImage> images;
};

Instance random_instance(SplitMix64& r) {
  Instance in;
  const std::size_t n_img = 1 + r.below(3);
  std::size_t anchor = 0;
  for (std::size_t i = 0; i < n_img; ++i) {
    EvalImage im;
    const std::size_t g = r.below(6);
    for (std::size_t k = 0; k < g; ++k) im.gts.push_back({oracle::random_box(r, 100, 5, 30), static_cast<int>(r.below(2))});
    for (const auto& gt : im.gts) {
      const std::size_t copies = r.below(3);
      for (std::size_t c = 0; c < copies; ++c) {
        const BBox b{gt.box.cx + r.normal() * 3, gt.box.cy + r.normal() * 3, gt.box.w * std::exp(0.1 * r.normal()),
                     gt.box.h * std::exp(0.1 * r.normal())};
        im.dets.push_back({b, r.uniform() < 0.9 ? gt.class_id : 1 - gt.class_id, r.uniform(), anchor++});
      }
    }
    for (std::size_t k = r.below(4); k > 0; --k)
      im.dets.push_back({oracle::random_box(r, 100, 5, 30), static_cast<int>(r.below(2)), r.uniform(), anchor++});
    in.images.push_back(std::move(im));
  }
  return in;
}

}  // namespace

TEST(AveragePrecision, HandExamples) {
  EXPECT_DOUBLE_EQ(average_precision({true}, 1).ap, 1.0);
  EXPECT_DOUBLE_EQ(average_precision({false}, 1).ap, 0.0);
  EXPECT_NEAR(average_precision({true, false, true}, 2).ap, 5.0 / 6.0, 1e-15);
  EXPECT_DOUBLE_EQ(average_precision({true, false}, 0).ap, 0.0);
  EXPECT_DOUBLE_EQ(average_precision({}, 3).ap, 0.0);
  const auto curve = average_precision({true, false, true}, 2);
  ASSERT_EQ(curve.points.size(), 3u);
  EXPECT_DOUBLE_EQ(curve.points[1].first, 0.5);
  EXPECT_DOUBLE_EQ(curve.points[1].second, 0.5);
}

TEST(AveragePrecision, MatchesDefinition) {
  SplitMix64 r(81);
  for (int t = 0; t < 500; ++t) {
    std::vector<bool> flags(r.below(30));
    std::size_t tp = 0;
    for (std::size_t i = 0; i < flags.size(); ++i) tp += (flags[i] = r.uniform() < 0.5);
    const std::size_t gts = tp + r.below(5);
    const double ap = average_precision(flags, gts).ap;
    EXPECT_NEAR(ap, oracle::ap_by_definition(flags, gts), 1e-12);
    EXPECT_GE(ap, 0.0);
    EXPECT_LE(ap, 1.0);
  }
}

TEST(MatchDetections, Examples) {
  const std::vector<LabeledBox> gts{{{10, 10, 8, 8}, 0}, {{40, 40, 8, 8}, 1}};
  const std::vector<Detection> perfect{{gts[0].box, 0, 0.9, 0}, {gts[1].box, 1, 0.8, 1}};
  EXPECT_EQ(match_detections(perfect, gts, 0.5), (std::vector<bool>{true, true}));
  const std::vector<Detection> dup{{gts[0].box, 0, 0.9, 0}, {gts[0].box, 0, 0.8, 1}};
  EXPECT_EQ(match_detections(dup, gts, 0.5), (std::vector<bool>{true, false}));
  const std::vector<Detection> wrong_class{{gts[0].box, 1, 0.9, 0}};
  EXPECT_EQ(match_detections(wrong_class, gts, 0.5), std::vector<bool>{false});
}

TEST(MatchDetections, MatchesProtocolReplay) {
  SplitMix64 r(82);
  for (int t = 0; t < 200; ++t) {
    const auto in = random_instance(r);
    const auto& im = in.images[0];
    const double thr = r.uniform(0.3, 0.9);
    const auto flags = match_detections(im.dets, im.gts, thr);
    // Replay: walk detections in order, best unmatched same-class gt by IoU.
    std::vector<bool> used(im.gts.size(), false);
    for (std::size_t d = 0; d < im.dets.size(); ++d) {
      int best = -1;
      double best_iou = -1.0;
      for (std::size_t g = 0; g < im.gts.size(); ++g) {
        if (used[g] || im.gts[g].class_id != im.dets[d].class_id) continue;
        const double v = oracle::interval_iou(im.dets[d].box, im.gts[g].box);
        if (v >= thr && v > best_iou) best = static_cast<int>(g), best_iou = v;
      }
      if (best >= 0) used[static_cast<std::size_t>(best)] = true;
      EXPECT_EQ(flags[d], best >= 0);
    }
  }
}

TEST(MeanAp, PerfectAndEmpty) {
  EvalImage im;
  im.gts = {{{10, 10, 8, 8}, 0}, {{40, 40, 8, 8}, 1}, {{60, 20, 10, 4}, 1}};
  for (std::size_t i = 0; i < im.gts.size(); ++i) im.dets.push_back({im.gts[i].box, im.gts[i].class_id, 0.5, i});
  const auto rep = mean_ap(std::vector<EvalImage>{im});
  EXPECT_EQ(rep.map, 1.0);
  for (double v : rep.ap_per_threshold) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(rep.thresholds.size(), 10u);
  im.dets.clear();
  const auto none = mean_ap(std::vector<EvalImage>{im});
  EXPECT_EQ(none.map, 0.0);
  EXPECT_EQ(none.ap50, 0.0);
}

TEST(MeanAp, ThresholdMonotoneAndRankInvariant) {
  SplitMix64 r(83);
  for (int t = 0; t < 200; ++t) {
    auto in = random_instance(r);
    const auto rep = mean_ap(in.images);
    for (std::size_t i = 1; i < rep.ap_per_threshold.size(); ++i)
      EXPECT_LE(rep.ap_per_threshold[i], rep.ap_per_threshold[i - 1] + 1e-15);
    EXPECT_GE(rep.ap50, rep.ap75);
    for (auto& im : in.images)
      for (auto& d : im.dets) d.score = std::pow(d.score, 3.0) * 0.5 + 0.1;
    const auto again = mean_ap(in.images);
    EXPECT_EQ(again.ap_per_threshold, rep.ap_per_threshold);
  }
}
