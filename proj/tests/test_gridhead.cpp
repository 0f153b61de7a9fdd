#include <gtest/gtest.h>

#include <cmath>

#include "simota/errors.hpp"
#include "simota/gridhead.hpp"
#include "simota/rng.hpp"

using namespace simota;

TEST(Anchors, CountsAndOrder) {
  const auto a = build_anchors(FpnSpec::with_size(64, 64));
  EXPECT_EQ(a.size(), 64u + 16u + 4u);
  EXPECT_EQ(a, build_anchors(FpnSpec::with_size(64, 64)));
  // Row-major within a level, levels in stride order.
  EXPECT_EQ(a[0], (AnchorPoint{0, 0, 0, 8}));
  EXPECT_EQ(a[1], (AnchorPoint{0, 1, 0, 8}));
  EXPECT_EQ(a[8], (AnchorPoint{0, 0, 1, 8}));
  EXPECT_EQ(a[64], (AnchorPoint{1, 0, 0, 16}));
  EXPECT_EQ(a[80], (AnchorPoint{2, 0, 0, 32}));

  FpnSpec one;
  one.strides = {32};
  one.height = one.width = 32;
  one.scale_ranges = {{0.0, INFINITY}};
  const auto single = build_anchors(one);
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0], (AnchorPoint{0, 0, 0, 32}));
}

TEST(Anchors, CountFormulaOverSizes) {
  for (int h : {32, 64, 96, 160, 640})
    for (int w : {32, 128, 224}) {
      const auto spec = FpnSpec::with_size(h, w);
      std::size_t want = 0;
      for (int s : spec.strides) want += static_cast<std::size_t>(h / s) * static_cast<std::size_t>(w / s);
      EXPECT_EQ(build_anchors(spec).size(), want);
      EXPECT_EQ(spec.num_anchors(), want);
    }
}

TEST(FpnSpecValidate, RejectsBadSpecs) {
  auto s = FpnSpec::with_size(100, 64);
  EXPECT_THROW(s.validate(), ValidationError);
  s = FpnSpec::with_size(64, 64);
  s.strides = {16, 8, 32};
  EXPECT_THROW(s.validate(), ValidationError);
  s = FpnSpec::with_size(64, 64);
  s.scale_ranges.back().second = 1000;
  EXPECT_THROW(s.validate(), ValidationError);
}

TEST(Decode, Examples) {
  const AnchorPoint a{0, 3, 2, 8};
  EXPECT_EQ(decode_box({0, 0, 0, 0}, a), (BBox{24, 16, 8, 8}));
  EXPECT_EQ(decode_box({0.5, 0.5, 0, 0}, a), (BBox{28, 20, 8, 8}));
  const auto d = decode(RawPrediction{{0, 0, 0, 0}, 0.0, {0.0, 2.0}}, a);
  EXPECT_EQ(d.obj_prob, 0.5);
  EXPECT_NEAR(d.cls_probs[1], 1.0 / (1.0 + std::exp(-2.0)), 1e-15);
}

TEST(Decode, OverflowAndNonFinite) {
  const AnchorPoint a{0, 0, 0, 8};
  EXPECT_NO_THROW(decode_box({0, 0, 20, -20}, a));
  // exp(t) > 1e8 * 8 needs t > ln(8e8) ~ 20.5.
  EXPECT_THROW(decode_box({0, 0, 21, 0}, a), NumericError);
  EXPECT_THROW(decode_box({0, 0, 0, 21}, a), NumericError);
  EXPECT_THROW(decode_box({NAN, 0, 0, 0}, a), NumericError);
}

TEST(Encode, Examples) {
  const AnchorPoint a{0, 3, 2, 8};
  const auto t0 = encode(BBox{24, 16, 8, 8}, a);
  for (double v : t0) EXPECT_EQ(v, 0.0);
  const auto t1 = encode(BBox{28, 20, 16, 8}, a);
  EXPECT_EQ(t1[0], 0.5);
  EXPECT_EQ(t1[1], 0.5);
  EXPECT_NEAR(t1[2], std::log(2.0), 1e-15);
  EXPECT_EQ(t1[3], 0.0);
  EXPECT_THROW(encode(BBox{1, 1, 0, 1}, a), ValidationError);
}

TEST(Encode, RoundTripsBothWays) {
  SplitMix64 r(21);
  for (int i = 0; i < 2000; ++i) {
    const int s = 8 << r.below(3);
    const AnchorPoint a{0, static_cast<int>(r.below(80)), static_cast<int>(r.below(80)), s};
    const BBox b{r.uniform(-100, 700), r.uniform(-100, 700), r.uniform(0.5, 600), r.uniform(0.5, 600)};
    const auto back = decode_box(encode(b, a), a);
    EXPECT_NEAR(back.cx, b.cx, 1e-9);
    EXPECT_NEAR(back.cy, b.cy, 1e-9);
    EXPECT_NEAR(back.w, b.w, 1e-9);
    EXPECT_NEAR(back.h, b.h, 1e-9);
    const BoxOffsets t{r.uniform(-5, 5), r.uniform(-5, 5), r.uniform(-20, 20), r.uniform(-20, 20)};
    const auto t2 = encode(decode_box(t, a), a);
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(t2[k], t[k], 1e-9);
  }
}

TEST(FpnLevel, RangeLookup) {
  const auto spec = FpnSpec::with_size(640, 640);
  EXPECT_EQ(assign_fpn_level({{0, 0, 40, 30}, 0}, spec), 0u);
  EXPECT_EQ(assign_fpn_level({{0, 0, 64, 64}, 0}, spec), 0u);
  EXPECT_EQ(assign_fpn_level({{0, 0, 64.0000001, 10}, 0}, spec), 1u);
  EXPECT_EQ(assign_fpn_level({{0, 0, 10, 128}, 0}, spec), 1u);
  EXPECT_EQ(assign_fpn_level({{0, 0, 500, 500}, 0}, spec), 2u);
  SplitMix64 r(2);
  for (int i = 0; i < 1000; ++i) {
    const double side = r.uniform(0.01, 1000);
    const auto l = assign_fpn_level({{0, 0, side, side / 2}, 0}, spec);
    EXPECT_GT(side, spec.scale_ranges[l].first);
    EXPECT_LE(side, spec.scale_ranges[l].second);
  }
}

TEST(HeadLayout, AttributeCounts) {
  const auto spec = FpnSpec::with_size(64, 64);
  for (auto kind : {HeadKind::coupled, HeadKind::decoupled}) {
    EXPECT_EQ(head_layout(80, kind, spec).attributes_per_anchor(), 85);
    EXPECT_EQ(head_layout(1, kind, spec).attributes_per_anchor(), 6);
  }
  const auto dec = head_layout(80, HeadKind::decoupled, spec);
  ASSERT_EQ(dec.planes.size(), 3u);
  EXPECT_EQ(dec.stem_channels, 256);
  int channels = 0;
  for (const auto& p : dec.planes) channels += p.channels;
  EXPECT_EQ(channels, 85);
  const auto cpl = head_layout(80, HeadKind::coupled, spec);
  ASSERT_EQ(cpl.planes.size(), 1u);
  EXPECT_EQ(cpl.planes[0].channels, 85);
  EXPECT_THROW(head_layout(0, HeadKind::coupled, spec), ValidationError);
}

namespace {

/// Planar tensor whose value encodes (anchor, attribute) so orderings can be compared.
PlanarOutput labeled(const HeadLayout& layout, const FpnSpec& spec) {
  PlanarOutput out;
  std::size_t base = 0;
  for (std::size_t l = 0; l < spec.num_levels(); ++l) {
    const int gh = spec.grid_h(l), gw = spec.grid_w(l);
    std::vector<std::vector<double>> planes;
    int attr0 = 0;
    for (const auto& p : layout.planes) {
      std::vector<double> buf(static_cast<std::size_t>(p.channels * gh * gw));
      for (int c = 0; c < p.channels; ++c)
        for (int y = 0; y < gh; ++y)
          for (int x = 0; x < gw; ++x) {
            const std::size_t anchor = base + static_cast<std::size_t>(y * gw + x);
            buf[static_cast<std::size_t>((c * gh + y) * gw + x)] = static_cast<double>(anchor * 1000 + attr0 + c);
          }
      attr0 += p.channels;
      planes.push_back(std::move(buf));
    }
    out.push_back(std::move(planes));
    base += static_cast<std::size_t>(gh * gw);
  }
  return out;
}

}  // namespace

TEST(HeadLayout, CoupledAndDecoupledFlattenAlike) {
  const auto spec = FpnSpec::with_size(64, 96);
  const auto dec = head_layout(3, HeadKind::decoupled, spec);
  const auto cpl = head_layout(3, HeadKind::coupled, spec);
  const auto fd = flatten(dec, labeled(dec, spec));
  const auto fc = flatten(cpl, labeled(cpl, spec));
  EXPECT_EQ(fd, fc);
  for (std::size_t i = 0; i < fd.size(); ++i) EXPECT_EQ(fd[i], static_cast<double>((i / 8) * 1000 + i % 8));
}

TEST(HeadLayout, FlattenIsABijection) {
  const auto spec = FpnSpec::with_size(64, 64);
  SplitMix64 r(8);
  for (auto kind : {HeadKind::coupled, HeadKind::decoupled}) {
    const auto layout = head_layout(4, kind, spec);
    std::vector<double> flat(spec.num_anchors() * 9);
    for (double& v : flat) v = r.normal();
    EXPECT_EQ(flatten(layout, unflatten(layout, flat)), flat);
    const auto planar = unflatten(layout, flat);
    EXPECT_EQ(unflatten(layout, flatten(layout, planar)), planar);
    EXPECT_EQ(from_predictions(to_predictions(flat, 4)), flat);
  }
}
