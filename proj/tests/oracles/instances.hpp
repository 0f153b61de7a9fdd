#pragma once

// Random problem generators shared by unit and acceptance tests.

#include <vector>

#include "simota/assigner.hpp"
#include "simota/gridhead.hpp"
#include "simota/rng.hpp"

namespace instances {

struct DetectionInstance {
  simota::FpnSpec spec;
  std::vector<simota::AnchorPoint> anchors;
  std::vector<simota::RawPrediction> raw;
  std::vector<simota::DecodedPrediction> preds;
  std::vector<simota::LabeledBox> gts;
};

/// Canvas sides from {32, 64, 96} with at most `max_anchors` anchors, 1..max_gts
/// gts with centers inside the canvas, predictions scattered around the gts.
inline DetectionInstance random_detection(simota::SplitMix64& r, int max_gts, std::size_t max_anchors,
                                          int num_classes = 3) {
  DetectionInstance d;
  for (;;) {
    const int h = 32 * static_cast<int>(1 + r.below(3));
    const int w = 32 * static_cast<int>(1 + r.below(3));
    d.spec = simota::FpnSpec::with_size(h, w);
    if (d.spec.num_anchors() <= max_anchors) break;
  }
  d.anchors = simota::build_anchors(d.spec);
  const int g = 1 + static_cast<int>(r.below(static_cast<std::uint64_t>(max_gts)));
  for (int i = 0; i < g; ++i) {
    const double cx = r.uniform(0.5, d.spec.width - 0.5), cy = r.uniform(0.5, d.spec.height - 0.5);
    d.gts.push_back({{cx, cy, r.uniform(4, d.spec.width * 0.6), r.uniform(4, d.spec.height * 0.6)},
                     static_cast<int>(r.below(static_cast<std::uint64_t>(num_classes)))});
  }
  for (const auto& a : d.anchors) {
    simota::RawPrediction p;
    const auto& g0 = d.gts[r.below(d.gts.size())].box;
    const simota::BBox guess{g0.cx + r.normal() * 6, g0.cy + r.normal() * 6, g0.w * std::exp(0.3 * r.normal()),
                             g0.h * std::exp(0.3 * r.normal())};
    p.t = simota::encode(guess, a);
    p.obj_logit = r.normal() * 2;
    for (int c = 0; c < num_classes; ++c) p.cls_logits.push_back(r.normal() * 2);
    d.preds.push_back(simota::decode(p, a));
    d.raw.push_back(std::move(p));
  }
  return d;
}

/// Cost matrix with random cls costs and IoUs and a random center mask,
/// assembled to satisfy the CostMatrix invariant. Continuous values, so
/// exact ties have probability zero.
inline simota::CostMatrix synthetic_costs(simota::SplitMix64& r, std::size_t g, std::size_t a,
                                          const simota::AssignerConfig& cfg, double mask_prob) {
  simota::CostMatrix cm;
  cm.costs = simota::MatrixD(g, a);
  cm.cls_costs = simota::MatrixD(g, a);
  cm.reg_costs = simota::MatrixD(g, a);
  cm.ious = simota::MatrixD(g, a);
  cm.center_mask = simota::MaskMatrix(g, a);
  cm.lambda = cfg.lambda;
  cm.offcenter_penalty = cfg.offcenter_penalty;
  cm.center_outside.assign(g, 0);
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t j = 0; j < a; ++j) {
      const double ov = r.uniform();
      cm.ious(i, j) = ov;
      cm.cls_costs(i, j) = r.uniform(0.0, 5.0);
      cm.reg_costs(i, j) = simota::regression_cost(ov);
      cm.center_mask(i, j) = r.uniform() < mask_prob ? 1 : 0;
      cm.costs(i, j) = cm.cls_costs(i, j) + cfg.lambda * cm.reg_costs(i, j) +
                       (cm.center_mask(i, j) ? 0.0 : cfg.offcenter_penalty);
    }
  return cm;
}

}  // namespace instances
