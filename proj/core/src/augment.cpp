#include "simota/augment.hpp"

#include <algorithm>
#include <cmath>

#include "simota/errors.hpp"

namespace simota {

AugConfig AugConfig::small_preset() {
  AugConfig c;
  c.scale_jitter = {0.5, 1.5};
  c.mixup_enabled = false;
  return c;
}

AugConfig AugConfig::large_preset() {
  AugConfig c;
  c.scale_jitter = {0.1, 2.0};
  c.mixup_enabled = true;
  return c;
}

void AugConfig::validate() const {
  if (!(scale_jitter.lo > 0.0 && scale_jitter.lo <= scale_jitter.hi))
    throw ValidationError("augment.scale_jitter must satisfy 0 < lo <= hi");
  if (!(mixup_blend.lo > 0.0 && mixup_blend.lo <= mixup_blend.hi && mixup_blend.hi < 1.0))
    throw ValidationError("augment.mixup_blend must lie inside (0, 1)");
  if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) throw ValidationError("augment.flip_prob must be in [0, 1]");
  if (!(brightness >= 0.0)) throw ValidationError("augment.brightness must be >= 0");
  if (!(contrast >= 0.0 && contrast <= 1.0)) throw ValidationError("augment.contrast must be in [0, 1]");
  if (!(mosaic_center_jitter >= 0.0 && mosaic_center_jitter <= 0.5))
    throw ValidationError("augment.mosaic_center_jitter must be in [0, 0.5]");
}

std::uint8_t round_pixel(double v) noexcept {
  const double r = std::floor(v + 0.5);
  return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

Image resize_nearest(const Image& src, double scale, double& sx, double& sy) {
  if (!(scale > 0.0)) throw ValidationError("resize: scale must be > 0");
  const int w = std::max(1, static_cast<int>(std::lround(src.width * scale)));
  const int h = std::max(1, static_cast<int>(std::lround(src.height * scale)));
  sx = static_cast<double>(w) / src.width;
  sy = static_cast<double>(h) / src.height;
  if (w == src.width && h == src.height) return src;
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    const int ys = std::min(src.height - 1, static_cast<int>(std::floor((y + 0.5) * src.height / h)));
    for (int x = 0; x < w; ++x) {
      const int xs = std::min(src.width - 1, static_cast<int>(std::floor((x + 0.5) * src.width / w)));
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = src.at(xs, ys, c);
    }
  }
  return out;
}

namespace {

// Copy `src` into `dst` with its top-left at (ox, oy), clipped to dst.
void paste(Image& dst, const Image& src, int ox, int oy) {
  const int x0 = std::max(0, ox), y0 = std::max(0, oy);
  const int x1 = std::min(dst.width, ox + src.width), y1 = std::min(dst.height, oy + src.height);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x)
      for (int c = 0; c < 3; ++c) dst.at(x, y, c) = src.at(x - ox, y - oy, c);
}

// Map every gt of `src` through `t`, clip to the canvas and record survivors.
void carry_boxes(const Scene& src, int scene_index, const Affine2D& t, int canvas_w, int canvas_h,
                 const ClipConfig& clip, AugResult& out) {
  for (std::size_t b = 0; b < src.gts.size(); ++b) {
    ++out.pre_clip_count;
    const auto mapped = clip_to_canvas(apply_affine(t, src.gts[b].box), canvas_w, canvas_h, clip);
    if (!mapped) continue;
    out.scene.gts.push_back({*mapped, src.gts[b].class_id});
    out.provenance.push_back({scene_index, static_cast<int>(b), t});
  }
}

}  // namespace

MosaicParams sample_mosaic(const AugConfig& cfg, int out_h, int out_w, const SplitMix64& rng) {
  MosaicParams p;
  auto center = rng.child("mosaic.center");
  const double j = cfg.mosaic_center_jitter;
  p.center_x = static_cast<int>(std::floor(2.0 * out_w * center.uniform(0.5 - j, 0.5 + j)));
  p.center_y = static_cast<int>(std::floor(2.0 * out_h * center.uniform(0.5 - j, 0.5 + j)));
  auto scale = rng.child("mosaic.scale");
  for (auto& s : p.scales) s = scale.uniform(cfg.scale_jitter.lo, cfg.scale_jitter.hi);
  auto crop = rng.child("mosaic.crop");
  p.crop_x = static_cast<int>(crop.below(static_cast<std::uint64_t>(out_w) + 1));
  p.crop_y = static_cast<int>(crop.below(static_cast<std::uint64_t>(out_h) + 1));
  return p;
}

AugResult mosaic_apply(std::span<const Scene> scenes, int out_h, int out_w, const MosaicParams& p,
                       const AugConfig& cfg) {
  if (scenes.size() != 4) throw ValidationError("mosaic: exactly 4 scenes required");
  if (out_h < 32 || out_w < 32) throw ValidationError("mosaic: output must be at least 32x32");
  const int ws_w = 2 * out_w, ws_h = 2 * out_h;
  if (p.center_x < 0 || p.center_x > ws_w || p.center_y < 0 || p.center_y > ws_h)
    throw ValidationError("mosaic: center outside workspace");
  if (p.crop_x < 0 || p.crop_x > out_w || p.crop_y < 0 || p.crop_y > out_h)
    throw ValidationError("mosaic: crop outside workspace");

  Image workspace(ws_w, ws_h, cfg.fill_value);
  AugResult out;
  out.scene.id = "mosaic(" + scenes[0].id + "," + scenes[1].id + "," + scenes[2].id + "," + scenes[3].id + ")";
  for (int q = 0; q < 4; ++q) {
    const Scene& s = scenes[static_cast<std::size_t>(q)];
    double sx = 1.0, sy = 1.0;
    const Image scaled = resize_nearest(s.image, p.scales[static_cast<std::size_t>(q)], sx, sy);
    const int ox = (q % 2 == 0) ? p.center_x - scaled.width : p.center_x;
    const int oy = (q < 2) ? p.center_y - scaled.height : p.center_y;
    paste(workspace, scaled, ox, oy);
    const Affine2D t{{sx, 0.0, static_cast<double>(ox - p.crop_x), 0.0, sy, static_cast<double>(oy - p.crop_y)}};
    carry_boxes(s, q, t, out_w, out_h, cfg.clip, out);
  }
  Image crop(out_w, out_h);
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x)
      for (int c = 0; c < 3; ++c) crop.at(x, y, c) = workspace.at(x + p.crop_x, y + p.crop_y, c);
  out.scene.image = std::move(crop);
  return out;
}

AugResult mosaic(std::span<const Scene> scenes, int out_h, int out_w, const AugConfig& cfg, const SplitMix64& rng,
                 MosaicParams* drawn) {
  cfg.validate();
  const auto p = sample_mosaic(cfg, out_h, out_w, rng);
  if (drawn) *drawn = p;
  return mosaic_apply(scenes, out_h, out_w, p, cfg);
}

MixupParams sample_mixup(const AugConfig& cfg, const SplitMix64& rng) {
  MixupParams p;
  auto scale = rng.child("mixup.scale");
  p.scale_a = scale.uniform(cfg.scale_jitter.lo, cfg.scale_jitter.hi);
  p.scale_b = scale.uniform(cfg.scale_jitter.lo, cfg.scale_jitter.hi);
  p.beta = rng.child("mixup.blend").uniform(cfg.mixup_blend.lo, cfg.mixup_blend.hi);
  return p;
}

AugResult mixup_apply(const Scene& a, const Scene& b, const MixupParams& p, const AugConfig& cfg) {
  if (a.width() != b.width() || a.height() != b.height())
    throw ValidationError("mixup: scenes must share a canvas size");
  if (!(p.beta >= 0.0 && p.beta <= 1.0)) throw ValidationError("mixup: beta must be in [0, 1]");
  const int w = a.width(), h = a.height();
  AugResult out;
  out.scene.id = "mixup(" + a.id + "," + b.id + ")";

  Image layers[2] = {Image(w, h, cfg.fill_value), Image(w, h, cfg.fill_value)};
  const Scene* src[2] = {&a, &b};
  const double scales[2] = {p.scale_a, p.scale_b};
  for (int i = 0; i < 2; ++i) {
    double sx = 1.0, sy = 1.0;
    paste(layers[i], resize_nearest(src[i]->image, scales[i], sx, sy), 0, 0);
    carry_boxes(*src[i], i, Affine2D::scale(sx, sy), w, h, cfg.clip, out);
  }
  Image blended(w, h);
  for (std::size_t k = 0; k < blended.data.size(); ++k)
    blended.data[k] = round_pixel(p.beta * layers[0].data[k] + (1.0 - p.beta) * layers[1].data[k]);
  out.scene.image = std::move(blended);
  return out;
}

AugResult mixup(const Scene& a, const Scene& b, const AugConfig& cfg, const SplitMix64& rng, MixupParams* drawn) {
  cfg.validate();
  const auto p = sample_mixup(cfg, rng);
  if (drawn) *drawn = p;
  return mixup_apply(a, b, p, cfg);
}

FlipParams sample_hflip(const AugConfig& cfg, const SplitMix64& rng) {
  return {rng.child("hflip").uniform() < cfg.flip_prob};
}

AugResult hflip_apply(const Scene& s, const FlipParams& p, const AugConfig& cfg) {
  AugResult out;
  out.scene.id = s.id;
  const Affine2D t = p.flipped ? Affine2D::hflip(s.width()) : Affine2D::identity();
  if (p.flipped) {
    out.scene.image = Image(s.width(), s.height());
    for (int y = 0; y < s.height(); ++y)
      for (int x = 0; x < s.width(); ++x)
        for (int c = 0; c < 3; ++c) out.scene.image.at(x, y, c) = s.image.at(s.width() - 1 - x, y, c);
  } else {
    out.scene.image = s.image;
  }
  carry_boxes(s, 0, t, s.width(), s.height(), cfg.clip, out);
  return out;
}

AugResult hflip(const Scene& s, const AugConfig& cfg, const SplitMix64& rng, FlipParams* drawn) {
  cfg.validate();
  const auto p = sample_hflip(cfg, rng);
  if (drawn) *drawn = p;
  return hflip_apply(s, p, cfg);
}

JitterParams sample_color_jitter(const AugConfig& cfg, const SplitMix64& rng) {
  auto r = rng.child("color");
  JitterParams p;
  p.brightness = r.uniform(-cfg.brightness, cfg.brightness);
  p.contrast = r.uniform(1.0 - cfg.contrast, 1.0 + cfg.contrast);
  return p;
}

AugResult color_jitter_apply(const Scene& s, const JitterParams& p) {
  AugResult out;
  out.scene = s;
  for (auto& v : out.scene.image.data) v = round_pixel(p.contrast * (v - 128.0) + 128.0 + p.brightness);
  out.pre_clip_count = s.gts.size();
  for (std::size_t b = 0; b < s.gts.size(); ++b) out.provenance.push_back({0, static_cast<int>(b), Affine2D::identity()});
  return out;
}

AugResult color_jitter(const Scene& s, const AugConfig& cfg, const SplitMix64& rng, JitterParams* drawn) {
  cfg.validate();
  const auto p = sample_color_jitter(cfg, rng);
  if (drawn) *drawn = p;
  return color_jitter_apply(s, p);
}

}  // namespace simota
