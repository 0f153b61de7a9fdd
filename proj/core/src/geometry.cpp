#include "simota/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "simota/errors.hpp"

namespace simota {

bool BBox::valid() const noexcept {
  return std::isfinite(cx) && std::isfinite(cy) && std::isfinite(w) && std::isfinite(h) && w > 0.0 &&
         h > 0.0;
}

Affine2D Affine2D::then_after(const Affine2D& in) const noexcept {
  const auto& a = m;
  const auto& b = in.m;
  return {{a[0] * b[0] + a[1] * b[3], a[0] * b[1] + a[1] * b[4], a[0] * b[2] + a[1] * b[5] + a[2],
           a[3] * b[0] + a[4] * b[3], a[3] * b[1] + a[4] * b[4], a[3] * b[2] + a[4] * b[5] + a[5]}};
}

namespace {

struct Extent {
  double x1, y1, x2, y2;
  explicit Extent(const BBox& b) noexcept : x1(b.x1()), y1(b.y1()), x2(b.x2()), y2(b.y2()) {}
  // Area from corners, so that intersecting a box with itself reproduces it bitwise.
  double area() const noexcept { return (x2 - x1) * (y2 - y1); }
};

double overlap(const Extent& a, const Extent& b) noexcept {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  return iw * ih;
}

}  // namespace

double intersection_area(const BBox& a, const BBox& b) noexcept { return overlap(Extent(a), Extent(b)); }

double iou(const BBox& a, const BBox& b) noexcept {
  const Extent ea(a), eb(b);
  const double inter = overlap(ea, eb);
  if (inter <= 0.0) return 0.0;
  const double uni = ea.area() + eb.area() - inter;
  return inter / uni;
}

double giou(const BBox& a, const BBox& b) noexcept {
  const Extent ea(a), eb(b);
  const double inter = overlap(ea, eb);
  const double uni = ea.area() + eb.area() - inter;
  const double cw = std::max(ea.x2, eb.x2) - std::min(ea.x1, eb.x1);
  const double ch = std::max(ea.y2, eb.y2) - std::min(ea.y1, eb.y1);
  const double enclose = cw * ch;
  return inter / uni - std::max(0.0, enclose - uni) / enclose;
}

BBox apply_affine(const Affine2D& t, const BBox& b) {
  if (t.determinant() == 0.0) throw ValidationError("apply_affine: singular transform");
  const auto& m = t.m;
  if (t.axis_aligned()) {
    // Exact for identity/translation/flip: no corner round trip.
    return {m[0] * b.cx + m[2], m[4] * b.cy + m[5], std::abs(m[0]) * b.w, std::abs(m[4]) * b.h};
  }
  const std::array<std::array<double, 2>, 4> corners{
      t.apply(b.x1(), b.y1()), t.apply(b.x2(), b.y1()), t.apply(b.x1(), b.y2()), t.apply(b.x2(), b.y2())};
  double x1 = corners[0][0], x2 = x1, y1 = corners[0][1], y2 = y1;
  for (const auto& p : corners) {
    x1 = std::min(x1, p[0]);
    x2 = std::max(x2, p[0]);
    y1 = std::min(y1, p[1]);
    y2 = std::max(y2, p[1]);
  }
  return BBox::from_corners(x1, y1, x2, y2);
}

namespace {

// Clip [c - s/2, c + s/2] to [0, limit]. Returns false when empty.
bool clip_axis(double& c, double& s, double limit) {
  const double lo = c - 0.5 * s;
  const double hi = c + 0.5 * s;
  if (lo >= 0.0 && hi <= limit) return true;
  const double nlo = std::max(lo, 0.0);
  const double nhi = std::min(hi, limit);
  if (nhi <= nlo) return false;
  c = 0.5 * (nlo + nhi);
  s = nhi - nlo;
  return true;
}

}  // namespace

std::optional<BBox> clip_to_canvas(const BBox& b, double width, double height, const ClipConfig& cfg) {
  if (!(width > 0.0) || !(height > 0.0)) throw ValidationError("clip_to_canvas: canvas must be positive");
  BBox out = b;
  if (!clip_axis(out.cx, out.w, width) || !clip_axis(out.cy, out.h, height)) return std::nullopt;
  if (out.w < cfg.min_side || out.h < cfg.min_side || out.area() < cfg.min_box_area) return std::nullopt;
  return out;
}

}  // namespace simota
