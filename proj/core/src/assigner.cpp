#include "simota/assigner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "simota/errors.hpp"
#include "simota/losses.hpp"
#include "simota/parallel.hpp"

namespace simota {

void AssignerConfig::validate() const {
  if (!(lambda >= 0.0)) throw ValidationError("assigner.lambda must be >= 0");
  if (q < 1) throw ValidationError("assigner.q must be >= 1");
  if (k_cap < 1) throw ValidationError("assigner.k_cap must be >= 1");
  if (!(offcenter_penalty >= 0.0)) throw ValidationError("assigner.offcenter_penalty must be >= 0");
  if (!(center_radius > 0.0)) throw ValidationError("assigner.center_radius must be > 0");
}

std::size_t CandidateMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
}

std::size_t Assignment::num_positives() const {
  return static_cast<std::size_t>(
      std::count_if(anchor_labels.begin(), anchor_labels.end(), [](int l) { return l != kBackground; }));
}

void Assignment::check_consistent() const {
  const auto g = static_cast<int>(per_gt_positives.size());
  if (k_values.size() != per_gt_positives.size()) throw ValidationError("assignment: k_values size mismatch");
  std::size_t listed = 0;
  for (int i = 0; i < g; ++i) {
    if (k_values[i] < 1) throw ValidationError("assignment: k must be >= 1");
    if (per_gt_positives[i].size() > static_cast<std::size_t>(k_values[i]))
      throw ValidationError("assignment: gt " + std::to_string(i) + " has more than k positives");
    for (std::size_t a : per_gt_positives[i]) {
      if (a >= anchor_labels.size() || anchor_labels[a] != i)
        throw ValidationError("assignment: positive list disagrees with anchor labels for gt " + std::to_string(i));
    }
    listed += per_gt_positives[i].size();
  }
  for (int l : anchor_labels)
    if (l < kBackground || l >= g) throw ValidationError("assignment: anchor label out of range");
  if (listed != num_positives()) throw ValidationError("assignment: anchor labels list extra positives");
}

namespace {

struct GridExtent {
  std::vector<int> gw, gh, stride;
};

GridExtent grid_extent(std::span<const AnchorPoint> anchors) {
  GridExtent e;
  for (const auto& a : anchors) {
    const auto l = static_cast<std::size_t>(a.level);
    if (l >= e.gw.size()) {
      e.gw.resize(l + 1, 0);
      e.gh.resize(l + 1, 0);
      e.stride.resize(l + 1, 0);
    }
    e.gw[l] = std::max(e.gw[l], a.gx + 1);
    e.gh[l] = std::max(e.gh[l], a.gy + 1);
    e.stride[l] = a.stride;
  }
  return e;
}

}  // namespace

CandidateMask center_candidates(const LabeledBox& gt, std::span<const AnchorPoint> anchors,
                                const AssignerConfig& cfg) {
  CandidateMask out;
  out.mask.assign(anchors.size(), 0);
  if (anchors.empty()) return out;
  const double cx = gt.box.cx;
  const double cy = gt.box.cy;
  const GridExtent ext = grid_extent(anchors);
  const double img_w = static_cast<double>(ext.gw[0]) * ext.stride[0];
  const double img_h = static_cast<double>(ext.gh[0]) * ext.stride[0];
  if (!(cx >= 0.0 && cx < img_w && cy >= 0.0 && cy < img_h)) {
    out.center_outside = true;
    return out;
  }
  for (std::size_t j = 0; j < anchors.size(); ++j) {
    const auto& a = anchors[j];
    if (cfg.center_mode == CenterMode::cell3x3) {
      const auto cgx = static_cast<int>(std::floor(cx / a.stride));
      const auto cgy = static_cast<int>(std::floor(cy / a.stride));
      out.mask[j] = std::abs(a.gx - cgx) <= 1 && std::abs(a.gy - cgy) <= 1;
    } else {
      const double dx = a.center_x() - cx;
      const double dy = a.center_y() - cy;
      const double r = cfg.center_radius * a.stride;
      out.mask[j] = dx * dx + dy * dy < r * r;
    }
  }
  return out;
}

double classification_cost(const DecodedPrediction& p, int gt_class) {
  double sum = 0.0;
  for (std::size_t c = 0; c < p.cls_probs.size(); ++c) {
    const double joint = std::sqrt(p.cls_probs[c] * p.obj_prob);
    sum += bce(joint, static_cast<int>(c) == gt_class ? 1.0 : 0.0).loss;
  }
  return sum;
}

double regression_cost(double iou_value) { return -std::log(iou_value + 1e-8); }

namespace {

void validate_prediction(const DecodedPrediction& p, std::size_t j) {
  bool ok = p.box.valid() && std::isfinite(p.obj_prob);
  for (double v : p.cls_probs) ok = ok && std::isfinite(v);
  if (!ok) throw ValidationError("cost_matrix: non-finite prediction at anchor " + std::to_string(j));
}

}  // namespace

CostMatrix cost_matrix(std::span<const DecodedPrediction> preds, std::span<const AnchorPoint> anchors,
                       std::span<const LabeledBox> gts, const AssignerConfig& cfg) {
  cfg.validate();
  if (preds.empty()) throw ValidationError("cost_matrix: no predictions");
  if (preds.size() != anchors.size()) throw ValidationError("cost_matrix: predictions and anchors differ in length");
  for (std::size_t j = 0; j < preds.size(); ++j) validate_prediction(preds[j], j);
  const std::size_t num_classes = preds.front().cls_probs.size();
  for (std::size_t i = 0; i < gts.size(); ++i) {
    if (!gts[i].box.valid()) throw ValidationError("cost_matrix: invalid gt box " + std::to_string(i));
    if (gts[i].class_id < 0 || static_cast<std::size_t>(gts[i].class_id) >= num_classes)
      throw ValidationError("cost_matrix: gt " + std::to_string(i) + " class out of range");
  }

  const std::size_t g = gts.size();
  const std::size_t a = preds.size();
  CostMatrix cm;
  cm.costs = MatrixD(g, a);
  cm.cls_costs = MatrixD(g, a);
  cm.reg_costs = MatrixD(g, a);
  cm.ious = MatrixD(g, a);
  cm.center_mask = MaskMatrix(g, a);
  cm.lambda = cfg.lambda;
  cm.offcenter_penalty = cfg.offcenter_penalty;
  cm.center_outside.assign(g, 0);

  parallel_for(g, cfg.threads, [&](std::size_t i) {
    const auto cand = center_candidates(gts[i], anchors, cfg);
    cm.center_outside[i] = cand.center_outside;
    for (std::size_t j = 0; j < a; ++j) {
      const double ov = iou(gts[i].box, preds[j].box);
      const double lc = classification_cost(preds[j], gts[i].class_id);
      const double lr = regression_cost(ov);
      cm.ious(i, j) = ov;
      cm.cls_costs(i, j) = lc;
      cm.reg_costs(i, j) = lr;
      cm.center_mask(i, j) = cand.mask[j];
      cm.costs(i, j) = lc + cfg.lambda * lr + (cand.mask[j] ? 0.0 : cfg.offcenter_penalty);
    }
  });
  return cm;
}

std::vector<int> dynamic_k(const MatrixD& ious, const AssignerConfig& cfg, const MaskMatrix& candidates) {
  if (ious.rows() != candidates.rows() || ious.cols() != candidates.cols())
    throw ValidationError("dynamic_k: iou and candidate shapes differ");
  std::vector<int> ks(ious.rows(), 1);
  std::vector<double> vals;
  for (std::size_t i = 0; i < ious.rows(); ++i) {
    vals.clear();
    for (std::size_t j = 0; j < ious.cols(); ++j)
      if (candidates(i, j)) vals.push_back(ious(i, j));
    const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(cfg.q), vals.size());
    std::partial_sort(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(top), vals.end(), std::greater<>());
    double sum = 0.0;
    for (std::size_t t = 0; t < top; ++t) sum += vals[t];
    const int rounded = static_cast<int>(std::floor(sum + 0.5));
    const int upper = std::max(1, std::min(cfg.k_cap, static_cast<int>(vals.size())));
    ks[i] = std::clamp(rounded, 1, upper);
  }
  return ks;
}

std::vector<std::vector<std::size_t>> simota_select(const CostMatrix& cm, std::span<const int> k_values) {
  if (k_values.size() != cm.num_gts()) throw ValidationError("simota_select: one k per gt required");
  std::vector<std::vector<std::size_t>> out(cm.num_gts());
  std::vector<std::size_t> cand;
  for (std::size_t i = 0; i < cm.num_gts(); ++i) {
    cand.clear();
    for (std::size_t j = 0; j < cm.num_anchors(); ++j)
      if (cm.center_mask(i, j)) cand.push_back(j);
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(std::max(0, k_values[i])), cand.size());
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end(),
                      [&](std::size_t x, std::size_t y) {
                        const double cx = cm.costs(i, x), cy = cm.costs(i, y);
                        return cx < cy || (cx == cy && x < y);
                      });
    out[i].assign(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return out;
}

namespace {

// Resolve anchors claimed by several gts; `better(i, k, j)` says whether gt i
// beats gt k for anchor j. Fills anchor_labels/per_gt_positives and records
// conflicts and unassigned gts.
template <typename Better>
void resolve_claims(const std::vector<std::vector<std::size_t>>& claims_by_gt, std::size_t num_anchors,
                    Better better, AssignResult& out) {
  const std::size_t g = claims_by_gt.size();
  std::vector<std::vector<int>> claimants(num_anchors);
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t j : claims_by_gt[i]) claimants[j].push_back(static_cast<int>(i));

  auto& asg = out.assignment;
  asg.anchor_labels.assign(num_anchors, kBackground);
  asg.per_gt_positives.assign(g, {});
  for (std::size_t j = 0; j < num_anchors; ++j) {
    const auto& cl = claimants[j];
    if (cl.empty()) continue;
    int win = cl.front();
    for (int c : cl)
      if (better(c, win, j)) win = c;
    asg.anchor_labels[j] = win;
    asg.per_gt_positives[static_cast<std::size_t>(win)].push_back(j);
    if (cl.size() > 1) {
      Conflict c{j, win, {}};
      for (int l : cl)
        if (l != win) c.losers.push_back(l);
      out.diagnostics.conflicts.push_back(std::move(c));
    }
  }
  for (std::size_t i = 0; i < g; ++i)
    if (asg.per_gt_positives[i].empty()) out.diagnostics.unassigned_gts.push_back(static_cast<int>(i));
}

}  // namespace

AssignResult simota_assign(const CostMatrix& cm, const AssignerConfig& cfg) {
  AssignResult out;
  const auto ks = dynamic_k(cm.ious, cfg, cm.center_mask);
  const auto selected = simota_select(cm, ks);
  resolve_claims(selected, cm.num_anchors(),
                 [&](int i, int k, std::size_t j) {
                   const double ci = cm.costs(static_cast<std::size_t>(i), j);
                   const double ck = cm.costs(static_cast<std::size_t>(k), j);
                   return ci < ck || (ci == ck && i < k);
                 },
                 out);
  out.assignment.k_values = ks;
  out.diagnostics.k_values = ks;
  for (std::size_t i = 0; i < cm.num_gts(); ++i) {
    std::size_t n = 0;
    for (std::size_t j = 0; j < cm.num_anchors(); ++j) n += cm.center_mask(i, j);
    out.diagnostics.candidate_counts.push_back(n);
    if (i < cm.center_outside.size() && cm.center_outside[i])
      out.diagnostics.center_outside_gts.push_back(static_cast<int>(i));
  }
  return out;
}

Assignment plan_to_assignment(const TransportPlan& plan) {
  const std::size_t rows = plan.plan.rows();
  if (rows == 0) throw ValidationError("plan_to_assignment: empty plan");
  const std::size_t g = rows - 1;
  Assignment asg;
  asg.anchor_labels.assign(plan.plan.cols(), kBackground);
  asg.per_gt_positives.assign(g, {});
  for (std::size_t j = 0; j < plan.plan.cols(); ++j) {
    std::size_t best = 0;
    for (std::size_t r = 1; r < rows; ++r)
      if (plan.plan(r, j) > plan.plan(best, j)) best = r;
    if (best < g) {
      asg.anchor_labels[j] = static_cast<int>(best);
      asg.per_gt_positives[best].push_back(j);
    }
  }
  asg.k_values.resize(g);
  for (std::size_t i = 0; i < g; ++i) {
    const double s = i < plan.supply.size() ? plan.supply[i] : 1.0;
    const int k = std::max(1, static_cast<int>(std::floor(s + 0.5)));
    asg.k_values[i] = std::max(k, static_cast<int>(asg.per_gt_positives[i].size()));
  }
  return asg;
}

AssignResult one_to_one_assign(const CostMatrix& cm) {
  AssignResult out;
  const auto cols = hungarian(cm.costs);
  auto& asg = out.assignment;
  asg.anchor_labels.assign(cm.num_anchors(), kBackground);
  asg.per_gt_positives.assign(cm.num_gts(), {});
  asg.k_values.assign(cm.num_gts(), 1);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    asg.anchor_labels[cols[i]] = static_cast<int>(i);
    asg.per_gt_positives[i].push_back(cols[i]);
  }
  out.diagnostics.k_values = asg.k_values;
  const bool has_mask = cm.center_mask.rows() == cm.num_gts() && cm.center_mask.cols() == cm.num_anchors();
  for (std::size_t i = 0; i < cm.num_gts(); ++i) {
    std::size_t n = 0;
    if (has_mask)
      for (std::size_t j = 0; j < cm.num_anchors(); ++j) n += cm.center_mask(i, j);
    out.diagnostics.candidate_counts.push_back(n);
  }
  return out;
}

namespace {

// Anchor index of the cell holding (cx, cy) on `level`, or nullopt outside.
std::optional<std::size_t> cell_index(const FpnSpec& spec, std::size_t level, double cx, double cy) {
  const int s = spec.strides[level];
  const double fx = std::floor(cx / s);
  const double fy = std::floor(cy / s);
  if (fx < 0 || fy < 0 || fx >= spec.grid_w(level) || fy >= spec.grid_h(level)) return std::nullopt;
  return spec.level_offset(level) + static_cast<std::size_t>(fy) * spec.grid_w(level) + static_cast<std::size_t>(fx);
}

void check_anchor_layout(std::span<const AnchorPoint> anchors, const FpnSpec& spec) {
  spec.validate();
  if (anchors.size() != spec.num_anchors()) throw ValidationError("anchors do not match the FPN spec");
}

}  // namespace

AssignResult single_center_assign(std::span<const LabeledBox> gts, std::span<const AnchorPoint> anchors,
                                  const FpnSpec& spec) {
  check_anchor_layout(anchors, spec);
  std::vector<std::vector<std::size_t>> claims(gts.size());
  AssignResult out;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    const auto level = assign_fpn_level(gts[i], spec);
    const auto idx = cell_index(spec, level, gts[i].box.cx, gts[i].box.cy);
    if (idx) claims[i].push_back(*idx);
    else out.diagnostics.center_outside_gts.push_back(static_cast<int>(i));
    out.diagnostics.candidate_counts.push_back(idx ? 1 : 0);
  }
  // Earlier gt keeps a shared anchor.
  resolve_claims(claims, anchors.size(), [](int i, int k, std::size_t) { return i < k; }, out);
  out.assignment.k_values.assign(gts.size(), 1);
  out.diagnostics.k_values = out.assignment.k_values;
  return out;
}

AssignResult multi_center_assign(std::span<const LabeledBox> gts, std::span<const AnchorPoint> anchors,
                                 const FpnSpec& spec) {
  check_anchor_layout(anchors, spec);
  std::vector<std::vector<std::size_t>> claims(gts.size());
  AssignResult out;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    const auto level = assign_fpn_level(gts[i], spec);
    const auto center = cell_index(spec, level, gts[i].box.cx, gts[i].box.cy);
    if (!center) {
      out.diagnostics.center_outside_gts.push_back(static_cast<int>(i));
    } else {
      const auto& a0 = anchors[*center];
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int gx = a0.gx + dx, gy = a0.gy + dy;
          if (gx < 0 || gy < 0 || gx >= spec.grid_w(level) || gy >= spec.grid_h(level)) continue;
          claims[i].push_back(spec.level_offset(level) + static_cast<std::size_t>(gy) * spec.grid_w(level) +
                              static_cast<std::size_t>(gx));
        }
    }
    out.diagnostics.candidate_counts.push_back(claims[i].size());
  }
  resolve_claims(claims, anchors.size(),
                 [&](int i, int k, std::size_t) {
                   const double ai = gts[static_cast<std::size_t>(i)].box.area();
                   const double ak = gts[static_cast<std::size_t>(k)].box.area();
                   return ai < ak || (ai == ak && i < k);
                 },
                 out);
  out.assignment.k_values.resize(gts.size());
  for (std::size_t i = 0; i < gts.size(); ++i)
    out.assignment.k_values[i] = std::max<int>(1, static_cast<int>(claims[i].size()));
  out.diagnostics.k_values = out.assignment.k_values;
  return out;
}

double agreement_rate(const Assignment& a, const Assignment& b) {
  if (a.anchor_labels.size() != b.anchor_labels.size()) throw ValidationError("agreement_rate: size mismatch");
  if (a.anchor_labels.empty()) return 1.0;
  std::size_t same = 0;
  for (std::size_t j = 0; j < a.anchor_labels.size(); ++j) same += a.anchor_labels[j] == b.anchor_labels[j];
  return static_cast<double>(same) / static_cast<double>(a.anchor_labels.size());
}

}  // namespace simota
