#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles/oracles.hpp"
#include "simota/postprocess.hpp"

using namespace simota;

namespace {

std::vector<Detection> random_dets(SplitMix64& r, std::size_t n, double extent, int classes) {
  std::vector<Detection> d;
  for (std::size_t i = 0; i < n; ++i)
    d.push_back({oracle::random_box(r, extent, 2, 40), static_cast<int>(r.below(static_cast<std::uint64_t>(classes))),
                 r.uniform(), i});
  return d;
}

std::vector<Detection> sorted_by_anchor(std::vector<Detection> d) {
  std::sort(d.begin(), d.end(), [](const Detection& a, const Detection& b) { return a.anchor_index < b.anchor_index; });
  return d;
}

}  // namespace

TEST(ScoreFilter, Examples) {
  SplitMix64 r(71);
  auto dets = random_dets(r, 50, 100, 2);
  EXPECT_EQ(score_filter(dets, 0.0).size(), 50u);
  EXPECT_TRUE(score_filter(dets, 1.0).empty());
  std::vector<Detection> want;
  for (const auto& d : dets)
    if (d.score > 0.5) want.push_back(d);
  EXPECT_EQ(score_filter(dets, 0.5), want);
}

TEST(Nms, Examples) {
  const BBox b{10, 10, 8, 8};
  const std::vector<Detection> twins{{b, 0, 0.8, 1}, {b, 0, 0.9, 2}};
  const auto kept = nms_greedy(twins, 0.5);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].score, 0.9);
  EXPECT_EQ(nms_reference(twins, 0.5), kept);

  const std::vector<Detection> apart{{b, 0, 0.8, 1}, {{50, 50, 8, 8}, 0, 0.9, 2}, {b, 1, 0.3, 3}};
  EXPECT_EQ(nms_greedy(apart, 0.5).size(), 3u);
  EXPECT_EQ(sorted_by_anchor(nms_reference(apart, 0.5)), sorted_by_anchor(nms_greedy(apart, 0.5)));

  EXPECT_TRUE(nms_greedy({}, 0.5).empty());
  EXPECT_TRUE(nms_reference({}, 0.5).empty());
  EXPECT_EQ(nms_reference(std::vector<Detection>{twins[0]}, 0.5), std::vector<Detection>{twins[0]});
}

TEST(Nms, TieGoesToLowerAnchor) {
  const BBox b{10, 10, 8, 8};
  const std::vector<Detection> tie{{b, 0, 0.7, 9}, {b, 0, 0.7, 4}};
  const auto kept = nms_greedy(tie, 0.5);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].anchor_index, 4u);
}

TEST(Nms, MatchesReferenceAndIsIndependentSet) {
  SplitMix64 r(72);
  for (int t = 0; t < 20; ++t) {
    const auto dets = random_dets(r, 300, 200, 3);
    const double thr = r.uniform(0.3, 0.8);
    const auto got = nms_greedy(dets, thr);
    EXPECT_EQ(sorted_by_anchor(got), sorted_by_anchor(nms_reference(dets, thr)));
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_NE(std::find(dets.begin(), dets.end(), got[i]), dets.end());
      for (std::size_t j = i + 1; j < got.size(); ++j) {
        if (got[i].class_id == got[j].class_id) {
          EXPECT_LE(iou(got[i].box, got[j].box), thr);
        }
      }
    }
    auto shuffled = dets;
    for (std::size_t i = shuffled.size() - 1; i > 0; --i) std::swap(shuffled[i], shuffled[r.below(i + 1)]);
    EXPECT_EQ(nms_greedy(shuffled, thr), got);
  }
}

TEST(NmsFree, OneConfidentAnchorPerObject) {
  const auto anchors = build_anchors(FpnSpec::with_size(64, 64));
  std::vector<RawPrediction> preds(anchors.size(), RawPrediction{{0.5, 0.5, 0, 0}, -8.0, {-8.0, -8.0}});
  preds[9] = {{0.5, 0.5, 0.3, 0.1}, 6.0, {5.0, -3.0}};
  preds[70] = {{0.2, 0.7, 0.0, 0.0}, 6.0, {-3.0, 5.0}};
  const auto dets = decode_nmsfree(preds, anchors, 0.3);
  ASSERT_EQ(dets.size(), 2u);
  EXPECT_EQ(dets[0].class_id, 0);
  EXPECT_EQ(dets[1].class_id, 1);
  EXPECT_NEAR(dets[0].score, sigmoid(6.0) * sigmoid(5.0), 1e-15);
  EXPECT_TRUE(decode_nmsfree(preds, anchors, 0.995).empty());
  // Without suppression every anchor above threshold survives.
  EXPECT_EQ(decode_nmsfree(preds, anchors, 0.0).size(), anchors.size());
}
