#include "simota/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <tuple>

#include "simota/errors.hpp"

namespace simota {

std::size_t TargetSet::num_fg() const {
  return static_cast<std::size_t>(
      std::count_if(gt_index.begin(), gt_index.end(), [](int g) { return g != kBackground; }));
}

BceResult bce(double p, double y) {
  const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  return {-(y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc)), p - y};
}

BceResult bce_logit(double z, double y) {
  const double p = sigmoid(z);
  if (p <= kProbClamp || p >= 1.0 - kProbClamp) return bce(p, y);
  // -ln p = softplus(-z), -ln(1 - p) = softplus(z)
  const double tail = std::log1p(std::exp(-std::abs(z)));
  const double sp_pos = std::max(z, 0.0) + tail;
  const double sp_neg = std::max(-z, 0.0) + tail;
  return {y * sp_neg + (1.0 - y) * sp_pos, p - y};
}

namespace {

// Ties in min/max split the derivative evenly, so a coinciding edge
// contributes the midpoint of its one-sided derivatives.
double tie_weight(double a, double b) { return a > b ? 1.0 : (a == b ? 0.5 : 0.0); }

// 1-D overlap or enclosure of the prediction [plo, phi] with [glo, ghi].
// Nested intervals report the inner length directly rather than hi - lo,
// which keeps the value free of cancellation noise as the pair slides.
struct Extent {
  double len;
  double d_lo;  // d len / d plo
  double d_hi;  // d len / d phi
};

Extent overlap(double plo, double phi, double plen, double glo, double ghi, double glen) {
  Extent e{};
  if (plo >= glo && phi <= ghi) e.len = plen;
  else if (glo >= plo && ghi <= phi) e.len = glen;
  else e.len = std::min(phi, ghi) - std::max(plo, glo);
  e.d_lo = -tie_weight(plo, glo);
  e.d_hi = tie_weight(ghi, phi);
  return e;
}

Extent enclosure(double plo, double phi, double plen, double glo, double ghi, double glen) {
  Extent e{};
  if (plo <= glo && phi >= ghi) e.len = plen;
  else if (glo <= plo && ghi >= phi) e.len = glen;
  else e.len = std::max(phi, ghi) - std::min(plo, glo);
  e.d_lo = -tie_weight(glo, plo);
  e.d_hi = tie_weight(phi, ghi);
  return e;
}

}  // namespace

IouLossResult iou_loss(const BoxOffsets& t, const AnchorPoint& anchor, const BBox& gt, IouVariant variant) {
  const BBox pb = decode_box(t, anchor);
  const double pw = pb.w, ph = pb.h;
  const double ap = pw * ph;
  const double ag = gt.w * gt.h;
  const Extent ox = overlap(pb.x1(), pb.x2(), pw, gt.x1(), gt.x2(), gt.w);
  const Extent oy = overlap(pb.y1(), pb.y2(), ph, gt.y1(), gt.y2(), gt.h);
  const double iw = ox.len, ih = oy.len;
  const bool overlap_any = iw > 0.0 && ih > 0.0;
  const double inter = overlap_any ? iw * ih : 0.0;
  const double uni = ap + ag - inter;
  const double iou_v = inter / uni;

  // Partials w.r.t. prediction corners (x1, x2, y1, y2).
  double d_inter[4] = {0, 0, 0, 0};
  if (overlap_any) {
    d_inter[0] = ox.d_lo * ih;
    d_inter[1] = ox.d_hi * ih;
    d_inter[2] = oy.d_lo * iw;
    d_inter[3] = oy.d_hi * iw;
  }
  const double d_ap[4] = {-ph, ph, -pw, pw};
  const double diou_dinter = (uni + inter) / (uni * uni);
  const double diou_dap = -inter / (uni * uni);

  IouLossResult out;
  double d_val[4];  // d(similarity)/d corner
  for (int k = 0; k < 4; ++k) d_val[k] = diou_dinter * d_inter[k] + diou_dap * d_ap[k];

  if (variant == IouVariant::iou) {
    out.loss = 1.0 - iou_v;
    out.plateau = !overlap_any;
  } else {
    const Extent ex = enclosure(pb.x1(), pb.x2(), pw, gt.x1(), gt.x2(), gt.w);
    const Extent ey = enclosure(pb.y1(), pb.y2(), ph, gt.y1(), gt.y2(), gt.h);
    const double cw = ex.len, ch = ey.len;
    const double c = cw * ch;
    out.loss = 1.0 - (iou_v - (c - uni) / c);
    const double d_cw[4] = {ex.d_lo, ex.d_hi, 0.0, 0.0};
    const double d_ch[4] = {0.0, 0.0, ey.d_lo, ey.d_hi};
    // giou = iou - 1 + U / C
    for (int k = 0; k < 4; ++k) {
      const double d_u = d_ap[k] - d_inter[k];
      const double d_c = d_cw[k] * ch + d_ch[k] * cw;
      d_val[k] += d_u / c - uni / (c * c) * d_c;
    }
  }

  // Corners to offsets: x1 = cx - w/2, x2 = cx + w/2, dcx/dtx = s, dw/dtw = w.
  const double s = anchor.stride;
  const double dx1 = -d_val[0], dx2 = -d_val[1], dy1 = -d_val[2], dy2 = -d_val[3];  // loss = 1 - value
  out.grad[0] = (dx1 + dx2) * s;
  out.grad[1] = (dy1 + dy2) * s;
  out.grad[2] = (dx2 - dx1) * 0.5 * pb.w;
  out.grad[3] = (dy2 - dy1) * 0.5 * pb.h;
  return out;
}

TargetSet build_targets(const Assignment& assign, std::span<const LabeledBox> gts) {
  const std::size_t a = assign.anchor_labels.size();
  TargetSet t;
  t.obj_target.assign(a, 0.0);
  t.gt_index.assign(a, kBackground);
  t.boxes.assign(a, BBox{});
  t.classes.assign(a, 0);
  for (std::size_t j = 0; j < a; ++j) {
    const int lbl = assign.anchor_labels[j];
    if (lbl == kBackground) continue;
    if (lbl < 0 || static_cast<std::size_t>(lbl) >= gts.size())
      throw ValidationError("build_targets: anchor " + std::to_string(j) + " references missing gt " +
                            std::to_string(lbl));
    t.obj_target[j] = 1.0;
    t.gt_index[j] = lbl;
    t.boxes[j] = gts[static_cast<std::size_t>(lbl)].box;
    t.classes[j] = gts[static_cast<std::size_t>(lbl)].class_id;
  }
  return t;
}

std::pair<LossBreakdown, GradientSet> total_loss(std::span<const RawPrediction> preds,
                                                 std::span<const AnchorPoint> anchors, const TargetSet& targets,
                                                 const LossWeights& w) {
  const std::size_t n = preds.size();
  if (anchors.size() != n || targets.size() != n)
    throw ValidationError("total_loss: predictions, anchors and targets differ in length");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const auto& a = anchors[x];
    const auto& b = anchors[y];
    return std::tie(a.level, a.gy, a.gx, a.stride) < std::tie(b.level, b.gy, b.gx, b.stride);
  });

  const std::size_t num_fg = targets.num_fg();
  const double norm = static_cast<double>(std::max<std::size_t>(num_fg, 1));

  LossBreakdown lb;
  lb.num_fg = num_fg;
  GradientSet gs;
  gs.d.resize(n);
  double sum_obj = 0.0, sum_cls = 0.0, sum_reg = 0.0;

  for (std::size_t j : order) {
    const auto& p = preds[j];
    auto& d = gs.d[j];
    d.cls_logits.assign(p.cls_logits.size(), 0.0);
    const bool fg = targets.gt_index[j] != kBackground;

    double obj_y = targets.obj_target[j];
    double term_obj = 0.0, term_cls = 0.0, term_reg = 0.0;
    if (fg) {
      const auto il = iou_loss(p.t, anchors[j], targets.boxes[j], w.variant);
      term_reg = il.loss;
      for (int k = 0; k < 4; ++k) d.t[static_cast<std::size_t>(k)] = w.reg * il.grad[static_cast<std::size_t>(k)] / norm;
      if (w.obj_target_iou) obj_y = iou(decode_box(p.t, anchors[j]), targets.boxes[j]);
      for (std::size_t c = 0; c < p.cls_logits.size(); ++c) {
        const auto r = bce_logit(p.cls_logits[c], static_cast<int>(c) == targets.classes[j] ? 1.0 : 0.0);
        term_cls += r.loss;
        d.cls_logits[c] = w.cls * r.grad_logit / norm;
      }
    }
    const auto ro = bce_logit(p.obj_logit, obj_y);
    term_obj = ro.loss;
    d.obj_logit = w.obj * ro.grad_logit / norm;

    bool finite = std::isfinite(term_obj) && std::isfinite(term_cls) && std::isfinite(term_reg) &&
                  std::isfinite(d.obj_logit);
    for (double v : d.t) finite = finite && std::isfinite(v);
    for (double v : d.cls_logits) finite = finite && std::isfinite(v);
    if (!finite) throw NumericError("total_loss: non-finite value at anchor " + std::to_string(j), j);

    sum_obj += term_obj;
    sum_cls += term_cls;
    sum_reg += term_reg;
  }

  lb.obj = sum_obj / norm;
  lb.cls = sum_cls / norm;
  lb.reg = sum_reg / norm;
  lb.total = w.cls * lb.cls + w.obj * lb.obj + w.reg * lb.reg;
  return {lb, std::move(gs)};
}

GradCheckReport grad_check(const std::function<double(std::span<const double>)>& f, std::span<const double> x,
                           std::span<const double> analytic, double h) {
  if (!(h > 0.0)) throw ValidationError("grad_check: h must be > 0");
  if (analytic.size() != x.size()) throw ValidationError("grad_check: gradient size mismatch");
  std::vector<double> xp(x.begin(), x.end());
  GradCheckReport rep;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    const double fp = f(xp);
    xp[i] = x[i] - h;
    const double fm = f(xp);
    xp[i] = x[i];
    const double fd = (fp - fm) / (2.0 * h);
    const double rel = std::abs(analytic[i] - fd) / std::max(1e-8, std::abs(analytic[i]));
    if (rel > rep.max_rel_err) {
      rep.max_rel_err = rel;
      rep.worst_index = i;
    }
  }
  return rep;
}

}  // namespace simota
