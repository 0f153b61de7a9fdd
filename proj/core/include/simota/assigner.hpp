#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "simota/geometry.hpp"
#include "simota/gridhead.hpp"
#include "simota/matrix.hpp"

namespace simota {

enum class CenterMode { cell3x3, radius };

struct AssignerConfig {
  /// Weight of the regression term in c_ij = L_cls + lambda * L_reg.
  double lambda = 3.0;
  CenterMode center_mode = CenterMode::radius;
  /// Radius in strides (radius mode only).
  double center_radius = 2.5;
  /// Number of top IoUs summed for dynamic k.
  int q = 10;
  double offcenter_penalty = 1e5;
  int k_cap = 10;
  /// Workers filling cost-matrix rows; results do not depend on it.
  unsigned threads = 1;

  void validate() const;
};

inline constexpr int kBackground = -1;

struct CandidateMask {
  std::vector<unsigned char> mask;
  /// The gt center lies outside the image; mask is all-false.
  bool center_outside = false;

  std::size_t count() const noexcept;
};

/// Pairwise G x A matching costs. Invariant:
///   costs == cls_costs + lambda * reg_costs + penalty * (1 - center_mask).
struct CostMatrix {
  MatrixD costs;
  MatrixD cls_costs;
  MatrixD reg_costs;
  MaskMatrix center_mask;
  MatrixD ious;
  double lambda = 0.0;
  double offcenter_penalty = 0.0;
  std::vector<unsigned char> center_outside;  // per gt

  std::size_t num_gts() const noexcept { return costs.rows(); }
  std::size_t num_anchors() const noexcept { return costs.cols(); }
};

struct Assignment {
  std::vector<int> anchor_labels;  // kBackground or gt index
  std::vector<std::vector<std::size_t>> per_gt_positives;
  std::vector<int> k_values;

  std::size_t num_positives() const;
  /// Throws ValidationError when the three views disagree.
  void check_consistent() const;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct Conflict {
  std::size_t anchor = 0;
  int winner = kBackground;
  std::vector<int> losers;
};

/// Per-run record surfaced by the CLI as JSON.
struct AssignDiagnostics {
  std::vector<int> k_values;
  std::vector<std::size_t> candidate_counts;
  std::vector<Conflict> conflicts;
  /// gts that received no positives (no candidates, or lost every anchor).
  std::vector<int> unassigned_gts;
  std::vector<int> center_outside_gts;
  std::optional<double> sinkhorn_residual;
};

struct AssignResult {
  Assignment assignment;
  AssignDiagnostics diagnostics;
};

/// cell3x3: the cell holding the gt center plus its 8 neighbours, on every
/// level. radius: anchors whose cell center is strictly within
/// center_radius * stride (Euclidean) of the gt center.
CandidateMask center_candidates(const LabeledBox& gt, std::span<const AnchorPoint> anchors,
                                const AssignerConfig& cfg);

/// BCE of the joint score sqrt(cls * obj) against the gt one-hot, summed over
/// classes. Probabilities are clamped to [1e-7, 1 - 1e-7].
double classification_cost(const DecodedPrediction& p, int gt_class);
/// -ln(iou + 1e-8).
double regression_cost(double iou);

/// Throws ValidationError on NaN predictions or an empty prediction list.
CostMatrix cost_matrix(std::span<const DecodedPrediction> preds, std::span<const AnchorPoint> anchors,
                       std::span<const LabeledBox> gts, const AssignerConfig& cfg);

/// k_i = clamp(round_half_up(sum of top-q candidate IoUs), 1, min(k_cap, #candidates)).
std::vector<int> dynamic_k(const MatrixD& ious, const AssignerConfig& cfg, const MaskMatrix& candidates);

/// Per-gt k least-cost candidate anchors (ties by lower anchor index), before
/// conflict resolution.
std::vector<std::vector<std::size_t>> simota_select(const CostMatrix& cm, std::span<const int> k_values);

AssignResult simota_assign(const CostMatrix& cm, const AssignerConfig& cfg);

struct SinkhornOptions {
  double eps = 0.1;
  int max_iters = 10'000;
  double tol = 1e-6;
  /// Record the marginal violation after every iteration.
  bool keep_history = false;
};

/// Entropic OT plan; row G is the background supplier with zero cost.
struct TransportPlan {
  MatrixD plan;  // (G + 1) x A
  std::vector<double> supply;
  std::vector<double> demand;
  int iterations = 0;
  double violation = 0.0;
  bool converged = false;
  std::vector<double> violation_history;
};

TransportPlan sinkhorn_ot(const MatrixD& costs, std::span<const int> k_values, const SinkhornOptions& opts = {});
TransportPlan sinkhorn_ot(const CostMatrix& cm, std::span<const int> k_values, const SinkhornOptions& opts = {});

/// Column-wise argmax; ties go to the lower row. k_values are the supplies,
/// raised to the positive count where the argmax grants more.
Assignment plan_to_assignment(const TransportPlan& plan);

/// Minimum-cost matching of every row to a distinct column (Hungarian).
/// Returns col index per row. Throws InfeasibleError when rows > cols.
std::vector<std::size_t> hungarian(const MatrixD& costs);

AssignResult one_to_one_assign(const CostMatrix& cm);

/// One positive per gt: the cell containing its center on the level from
/// assign_fpn_level (floor rule). Later gts lose shared anchors.
AssignResult single_center_assign(std::span<const LabeledBox> gts, std::span<const AnchorPoint> anchors,
                                  const FpnSpec& spec);

/// 3x3 center neighbourhood on the designated level, all positive. Shared
/// anchors go to the smaller-area gt (ties: lower index).
AssignResult multi_center_assign(std::span<const LabeledBox> gts, std::span<const AnchorPoint> anchors,
                                 const FpnSpec& spec);

/// Fraction of anchors with identical labels.
double agreement_rate(const Assignment& a, const Assignment& b);

}  // namespace simota
