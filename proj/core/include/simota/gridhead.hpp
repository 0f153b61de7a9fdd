#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "simota/geometry.hpp"

namespace simota {

/// Feature-pyramid geometry: one grid per stride over an H x W input.
///
/// scale_ranges[l] = (lo, hi] in pixels of max(w, h); the last hi is +inf so
/// every object lands on exactly one level.
struct FpnSpec {
  std::vector<int> strides{8, 16, 32};
  int height = 640;
  int width = 640;
  std::vector<std::pair<double, double>> scale_ranges{
      {0.0, 64.0}, {64.0, 128.0}, {128.0, std::numeric_limits<double>::infinity()}};

  static FpnSpec with_size(int height, int width) {
    FpnSpec s;
    s.height = height;
    s.width = width;
    return s;
  }

  int grid_w(std::size_t level) const { return width / strides[level]; }
  int grid_h(std::size_t level) const { return height / strides[level]; }
  std::size_t num_levels() const noexcept { return strides.size(); }
  /// Index of the first anchor of `level` in build_anchors order.
  std::size_t level_offset(std::size_t level) const;
  std::size_t num_anchors() const;

  /// Throws ValidationError describing the first violated invariant.
  void validate() const;
};

struct AnchorPoint {
  int level = 0;
  int gx = 0;
  int gy = 0;
  int stride = 0;

  double center_x() const noexcept { return (gx + 0.5) * stride; }
  double center_y() const noexcept { return (gy + 0.5) * stride; }

  friend bool operator==(const AnchorPoint&, const AnchorPoint&) = default;
};

/// Offsets (tx, ty, tw, th) relative to an anchor cell.
using BoxOffsets = std::array<double, 4>;

struct RawPrediction {
  BoxOffsets t{0.0, 0.0, 0.0, 0.0};
  double obj_logit = 0.0;
  std::vector<double> cls_logits;

  friend bool operator==(const RawPrediction&, const RawPrediction&) = default;
};

struct DecodedPrediction {
  BBox box;
  double obj_prob = 0.0;
  std::vector<double> cls_probs;
};

inline double sigmoid(double z) noexcept {
  // Branches keep exp() from overflowing on either tail.
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// exp(tw) larger than this multiple of the stride is reported as overflow.
inline constexpr double kDecodeOverflowFactor = 1e8;

std::vector<AnchorPoint> build_anchors(const FpnSpec& spec);

/// Box: cx = (gx + tx) * s, cy = (gy + ty) * s, w = exp(tw) * s, h = exp(th) * s.
/// Throws NumericError on non-finite offsets or exp(t) > 1e8 * stride.
BBox decode_box(const BoxOffsets& t, const AnchorPoint& a);
DecodedPrediction decode(const RawPrediction& p, const AnchorPoint& a);

/// Exact inverse of decode_box.
BoxOffsets encode(const BBox& b, const AnchorPoint& a);

/// Level whose (lo, hi] contains max(w, h).
std::size_t assign_fpn_level(const LabeledBox& gt, const FpnSpec& spec);

enum class HeadKind { coupled, decoupled };

struct HeadPlane {
  const char* name;  // "reg", "obj", "cls" or "out"
  int channels;
};

/// Per-level output layout of a detection head. The per-anchor attribute
/// order is [tx, ty, tw, th, obj, cls_0 .. cls_{C-1}] for both kinds.
struct HeadLayout {
  HeadKind kind = HeadKind::decoupled;
  int num_classes = 1;
  /// Channel width after the 1x1 reduction conv (decoupled only).
  int stem_channels = 0;
  /// 3x3 convs per branch (decoupled only).
  int branch_convs = 0;
  std::vector<HeadPlane> planes;
  std::vector<std::pair<int, int>> grid_hw;  // per level

  int attributes_per_anchor() const noexcept { return 4 + 1 + num_classes; }
  std::size_t num_anchors() const;
};

HeadLayout head_layout(int num_classes, HeadKind kind, const FpnSpec& spec);

/// Planar head output: levels -> planes -> CHW buffer.
using PlanarOutput = std::vector<std::vector<std::vector<double>>>;

/// Planar form -> (num_anchors x attributes) row-major, anchors in
/// build_anchors order.
std::vector<double> flatten(const HeadLayout& layout, const PlanarOutput& planar);
PlanarOutput unflatten(const HeadLayout& layout, std::span<const double> flat);

/// Split a flattened tensor into per-anchor RawPredictions and back.
std::vector<RawPrediction> to_predictions(std::span<const double> flat, int num_classes);
std::vector<double> from_predictions(std::span<const RawPrediction> preds);

}  // namespace simota
