#pragma once

#include <array>
#include <optional>

namespace simota {

/// Axis-aligned box in pixels, stored center/size. Corner form is computed on
/// demand. Valid boxes have finite components and w, h > 0.
struct BBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  static BBox from_corners(double x1, double y1, double x2, double y2) noexcept {
    return {0.5 * (x1 + x2), 0.5 * (y1 + y2), x2 - x1, y2 - y1};
  }

  double x1() const noexcept { return cx - 0.5 * w; }
  double y1() const noexcept { return cy - 0.5 * h; }
  double x2() const noexcept { return cx + 0.5 * w; }
  double y2() const noexcept { return cy + 0.5 * h; }
  double area() const noexcept { return w * h; }

  bool valid() const noexcept;

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct LabeledBox {
  BBox box;
  int class_id = 0;

  friend bool operator==(const LabeledBox&, const LabeledBox&) = default;
};

/// 2x3 row-major affine map: [a b tx; c d ty].
struct Affine2D {
  std::array<double, 6> m{1.0, 0.0, 0.0, 0.0, 1.0, 0.0};

  static Affine2D identity() noexcept { return {}; }
  static Affine2D translate(double dx, double dy) noexcept { return {{1.0, 0.0, dx, 0.0, 1.0, dy}}; }
  static Affine2D scale(double sx, double sy) noexcept { return {{sx, 0.0, 0.0, 0.0, sy, 0.0}}; }
  /// Mirror about the vertical line x = width / 2.
  static Affine2D hflip(double width) noexcept { return {{-1.0, 0.0, width, 0.0, 1.0, 0.0}}; }

  double determinant() const noexcept { return m[0] * m[4] - m[1] * m[3]; }
  bool axis_aligned() const noexcept { return m[1] == 0.0 && m[3] == 0.0; }

  /// this ∘ inner: apply `inner` first, then this.
  Affine2D then_after(const Affine2D& inner) const noexcept;

  std::array<double, 2> apply(double x, double y) const noexcept {
    return {m[0] * x + m[1] * y + m[2], m[3] * x + m[4] * y + m[5]};
  }

  friend bool operator==(const Affine2D&, const Affine2D&) = default;
};

/// Post-clip degenerate-box filter.
struct ClipConfig {
  double min_box_area = 1.0;
  double min_side = 1.0;
};

double iou(const BBox& a, const BBox& b) noexcept;
double giou(const BBox& a, const BBox& b) noexcept;

/// Area of the intersection; symmetric in its arguments.
double intersection_area(const BBox& a, const BBox& b) noexcept;

/// Axis-aligned bounding box of the four transformed corners. Throws
/// ValidationError on a singular transform.
BBox apply_affine(const Affine2D& t, const BBox& b);

/// Intersection of `b` with [0,width] x [0,height]; nullopt when the result
/// falls below the ClipConfig limits. Sides that do not overhang keep their
/// original bits.
std::optional<BBox> clip_to_canvas(const BBox& b, double width, double height,
                                   const ClipConfig& cfg = {});

}  // namespace simota
