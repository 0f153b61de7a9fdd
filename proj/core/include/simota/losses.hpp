#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "simota/assigner.hpp"
#include "simota/geometry.hpp"
#include "simota/gridhead.hpp"

namespace simota {

inline constexpr double kProbClamp = 1e-7;

struct TargetSet {
  std::vector<double> obj_target;  // per anchor, 0 or 1
  std::vector<int> gt_index;       // per anchor, kBackground for negatives
  std::vector<BBox> boxes;         // per anchor, meaningful for positives only
  std::vector<int> classes;        // per anchor, meaningful for positives only

  std::size_t size() const noexcept { return obj_target.size(); }
  std::size_t num_fg() const;
};

enum class IouVariant { iou, giou };

struct LossWeights {
  double cls = 1.0;
  double obj = 1.0;
  double reg = 5.0;
  IouVariant variant = IouVariant::iou;
  /// Replace the positive objectness target 1 with the (detached) IoU of the
  /// decoded box against its gt.
  bool obj_target_iou = false;
};

/// Components are normalized by max(num_fg, 1) and unweighted;
/// total = w.cls * cls + w.obj * obj + w.reg * reg.
struct LossBreakdown {
  double cls = 0.0;
  double obj = 0.0;
  double reg = 0.0;
  double total = 0.0;
  std::size_t num_fg = 0;
};

/// Partials of the total loss, shaped like the predictions they belong to.
struct GradientSet {
  std::vector<RawPrediction> d;
};

struct BceResult {
  double loss;
  double grad_logit;  // p - y
};

/// -(y ln p + (1 - y) ln(1 - p)) with p clamped to [1e-7, 1 - 1e-7].
BceResult bce(double p, double y);
/// Same value as bce(sigmoid(z), y), computed from the logit so ln(1 - p)
/// keeps its precision when p is close to 1.
BceResult bce_logit(double z, double y);

struct IouLossResult {
  double loss = 0.0;
  BoxOffsets grad{0.0, 0.0, 0.0, 0.0};
  /// Plain IoU with disjoint boxes: loss 1 and zero gradient.
  bool plateau = false;
};

/// 1 - IoU (or 1 - GIoU) of the decoded prediction against `gt`, with the
/// gradient taken through the decode formulas.
IouLossResult iou_loss(const BoxOffsets& t, const AnchorPoint& anchor, const BBox& gt,
                       IouVariant variant = IouVariant::iou);
inline IouLossResult iou_loss(const RawPrediction& p, const AnchorPoint& anchor, const BBox& gt,
                              IouVariant variant = IouVariant::iou) {
  return iou_loss(p.t, anchor, gt, variant);
}

/// Throws ValidationError if the assignment references a gt that does not exist.
TargetSet build_targets(const Assignment& assign, std::span<const LabeledBox> gts);

/// Objectness BCE over every anchor; classification BCE and IoU loss over
/// positives. Terms are reduced in canonical anchor order (level, gy, gx) so
/// the totals do not depend on the order of the inputs. Throws NumericError
/// naming the first anchor that produces a non-finite value.
std::pair<LossBreakdown, GradientSet> total_loss(std::span<const RawPrediction> preds,
                                                 std::span<const AnchorPoint> anchors, const TargetSet& targets,
                                                 const LossWeights& weights = {});

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::size_t worst_index = 0;
};

/// Central-difference check: max_i |g_i - (f(x + h e_i) - f(x - h e_i)) / 2h| / max(1e-8, |g_i|).
GradCheckReport grad_check(const std::function<double(std::span<const double>)>& f, std::span<const double> x,
                           std::span<const double> analytic, double h);

}  // namespace simota
