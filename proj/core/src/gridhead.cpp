#include "simota/gridhead.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "simota/errors.hpp"

namespace simota {

std::size_t FpnSpec::level_offset(std::size_t level) const {
  std::size_t off = 0;
  for (std::size_t l = 0; l < level; ++l) off += static_cast<std::size_t>(grid_w(l)) * grid_h(l);
  return off;
}

std::size_t FpnSpec::num_anchors() const { return level_offset(strides.size()); }

void FpnSpec::validate() const {
  if (strides.empty()) throw ValidationError("fpn: strides must be non-empty");
  if (height <= 0 || width <= 0) throw ValidationError("fpn: input_size must be positive");
  for (std::size_t i = 0; i < strides.size(); ++i) {
    if (strides[i] <= 0) throw ValidationError("fpn: strides must be positive");
    if (i > 0 && strides[i] <= strides[i - 1]) throw ValidationError("fpn: strides must be strictly increasing");
    if (height % strides[i] != 0 || width % strides[i] != 0)
      throw ValidationError("fpn: input_size " + std::to_string(height) + "x" + std::to_string(width) +
                            " not divisible by stride " + std::to_string(strides[i]));
  }
  if (scale_ranges.size() != strides.size()) throw ValidationError("fpn: need one scale range per level");
  if (scale_ranges.front().first != 0.0) throw ValidationError("fpn: first scale range must start at 0");
  if (!std::isinf(scale_ranges.back().second)) throw ValidationError("fpn: last scale range must end at +inf");
  for (std::size_t i = 0; i < scale_ranges.size(); ++i) {
    if (!(scale_ranges[i].first < scale_ranges[i].second))
      throw ValidationError("fpn: scale range " + std::to_string(i) + " is empty");
    if (i > 0 && scale_ranges[i].first != scale_ranges[i - 1].second)
      throw ValidationError("fpn: scale ranges must be contiguous");
  }
}

std::vector<AnchorPoint> build_anchors(const FpnSpec& spec) {
  spec.validate();
  std::vector<AnchorPoint> out;
  out.reserve(spec.num_anchors());
  for (std::size_t l = 0; l < spec.num_levels(); ++l) {
    const int s = spec.strides[l];
    for (int gy = 0; gy < spec.grid_h(l); ++gy)
      for (int gx = 0; gx < spec.grid_w(l); ++gx) out.push_back({static_cast<int>(l), gx, gy, s});
  }
  return out;
}

BBox decode_box(const BoxOffsets& t, const AnchorPoint& a) {
  for (double v : t)
    if (!std::isfinite(v)) throw NumericError("decode: non-finite offset");
  const double s = a.stride;
  const double ew = std::exp(t[2]);
  const double eh = std::exp(t[3]);
  if (ew > kDecodeOverflowFactor * s || eh > kDecodeOverflowFactor * s)
    throw NumericError("decode-overflow: exp(t) exceeds 1e8 * stride");
  return {(a.gx + t[0]) * s, (a.gy + t[1]) * s, ew * s, eh * s};
}

DecodedPrediction decode(const RawPrediction& p, const AnchorPoint& a) {
  DecodedPrediction d;
  d.box = decode_box(p.t, a);
  d.obj_prob = sigmoid(p.obj_logit);
  d.cls_probs.reserve(p.cls_logits.size());
  for (double z : p.cls_logits) d.cls_probs.push_back(sigmoid(z));
  return d;
}

BoxOffsets encode(const BBox& b, const AnchorPoint& a) {
  if (!(b.w > 0.0) || !(b.h > 0.0)) throw ValidationError("encode: box must have positive size");
  const double s = a.stride;
  return {b.cx / s - a.gx, b.cy / s - a.gy, std::log(b.w / s), std::log(b.h / s)};
}

std::size_t assign_fpn_level(const LabeledBox& gt, const FpnSpec& spec) {
  const double side = std::max(gt.box.w, gt.box.h);
  for (std::size_t l = 0; l < spec.scale_ranges.size(); ++l) {
    const auto [lo, hi] = spec.scale_ranges[l];
    if (side > lo && side <= hi) return l;
  }
  return spec.scale_ranges.size() - 1;
}

std::size_t HeadLayout::num_anchors() const {
  std::size_t n = 0;
  for (auto [h, w] : grid_hw) n += static_cast<std::size_t>(h) * w;
  return n;
}

HeadLayout head_layout(int num_classes, HeadKind kind, const FpnSpec& spec) {
  if (num_classes < 1) throw ValidationError("head_layout: num_classes must be >= 1");
  spec.validate();
  HeadLayout out;
  out.kind = kind;
  out.num_classes = num_classes;
  if (kind == HeadKind::decoupled) {
    out.stem_channels = 256;
    out.branch_convs = 2;
    out.planes = {{"reg", 4}, {"obj", 1}, {"cls", num_classes}};
  } else {
    out.planes = {{"out", 5 + num_classes}};
  }
  for (std::size_t l = 0; l < spec.num_levels(); ++l) out.grid_hw.emplace_back(spec.grid_h(l), spec.grid_w(l));
  return out;
}

namespace {

// Attribute offset of each plane's first channel. Planes are listed in
// attribute order for both kinds, so this is a running sum.
std::vector<int> plane_attr_offsets(const HeadLayout& layout) {
  std::vector<int> offs;
  int acc = 0;
  for (const auto& p : layout.planes) {
    offs.push_back(acc);
    acc += p.channels;
  }
  return offs;
}

}  // namespace

std::vector<double> flatten(const HeadLayout& layout, const PlanarOutput& planar) {
  if (planar.size() != layout.grid_hw.size()) throw ValidationError("flatten: level count mismatch");
  const int attrs = layout.attributes_per_anchor();
  const auto offs = plane_attr_offsets(layout);
  std::vector<double> flat(layout.num_anchors() * attrs);
  std::size_t anchor_base = 0;
  for (std::size_t l = 0; l < planar.size(); ++l) {
    const auto [gh, gw] = layout.grid_hw[l];
    const std::size_t cells = static_cast<std::size_t>(gh) * gw;
    if (planar[l].size() != layout.planes.size()) throw ValidationError("flatten: plane count mismatch");
    for (std::size_t p = 0; p < layout.planes.size(); ++p) {
      const auto& buf = planar[l][p];
      const int ch = layout.planes[p].channels;
      if (buf.size() != cells * ch) throw ValidationError("flatten: plane size mismatch");
      for (int c = 0; c < ch; ++c)
        for (std::size_t i = 0; i < cells; ++i) flat[(anchor_base + i) * attrs + offs[p] + c] = buf[c * cells + i];
    }
    anchor_base += cells;
  }
  return flat;
}

PlanarOutput unflatten(const HeadLayout& layout, std::span<const double> flat) {
  const int attrs = layout.attributes_per_anchor();
  if (flat.size() != layout.num_anchors() * attrs) throw ValidationError("unflatten: size mismatch");
  const auto offs = plane_attr_offsets(layout);
  PlanarOutput out(layout.grid_hw.size());
  std::size_t anchor_base = 0;
  for (std::size_t l = 0; l < layout.grid_hw.size(); ++l) {
    const auto [gh, gw] = layout.grid_hw[l];
    const std::size_t cells = static_cast<std::size_t>(gh) * gw;
    for (std::size_t p = 0; p < layout.planes.size(); ++p) {
      const int ch = layout.planes[p].channels;
      std::vector<double> buf(cells * ch);
      for (int c = 0; c < ch; ++c)
        for (std::size_t i = 0; i < cells; ++i) buf[c * cells + i] = flat[(anchor_base + i) * attrs + offs[p] + c];
      out[l].push_back(std::move(buf));
    }
    anchor_base += cells;
  }
  return out;
}

std::vector<RawPrediction> to_predictions(std::span<const double> flat, int num_classes) {
  const std::size_t attrs = 5 + static_cast<std::size_t>(num_classes);
  if (num_classes < 1 || flat.size() % attrs != 0) throw ValidationError("to_predictions: size mismatch");
  std::vector<RawPrediction> out(flat.size() / attrs);
  for (std::size_t a = 0; a < out.size(); ++a) {
    const double* row = flat.data() + a * attrs;
    out[a].t = {row[0], row[1], row[2], row[3]};
    out[a].obj_logit = row[4];
    out[a].cls_logits.assign(row + 5, row + attrs);
  }
  return out;
}

std::vector<double> from_predictions(std::span<const RawPrediction> preds) {
  std::vector<double> out;
  for (const auto& p : preds) {
    out.insert(out.end(), p.t.begin(), p.t.end());
    out.push_back(p.obj_logit);
    out.insert(out.end(), p.cls_logits.begin(), p.cls_logits.end());
  }
  return out;
}

}  // namespace simota
