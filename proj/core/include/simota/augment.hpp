#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "simota/geometry.hpp"
#include "simota/image.hpp"
#include "simota/rng.hpp"

namespace simota {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Range&, const Range&) = default;
};

struct AugConfig {
  Range scale_jitter{0.1, 2.0};
  bool mixup_enabled = true;
  Range mixup_blend{0.4, 0.6};
  double flip_prob = 0.5;
  /// Brightness offset drawn from [-brightness, +brightness].
  double brightness = 32.0;
  /// Contrast factor drawn from [1 - contrast, 1 + contrast].
  double contrast = 0.2;
  /// Mosaic center drawn from (0.5 +- center_jitter) of the workspace per axis.
  double mosaic_center_jitter = 0.25;
  std::uint8_t fill_value = 114;
  ClipConfig clip{};
  std::uint64_t seed = 0;

  /// Weakened pipeline for small models: no mixup, scale jitter [0.5, 1.5].
  static AugConfig small_preset();
  /// Strong pipeline for large models: mixup on, scale jitter [0.1, 2.0].
  static AugConfig large_preset();

  void validate() const;
};

/// Where an output box came from: box `source_box` of input scene
/// `source_scene`, mapped by `affine` into output pixels and then clipped.
struct BoxProvenance {
  int source_scene = 0;
  int source_box = 0;
  Affine2D affine;
};

struct MosaicParams {
  int center_x = 0;  // workspace pixels
  int center_y = 0;
  std::array<double, 4> scales{1.0, 1.0, 1.0, 1.0};  // quadrants TL, TR, BL, BR
  int crop_x = 0;
  int crop_y = 0;
};

struct MixupParams {
  double scale_a = 1.0;
  double scale_b = 1.0;
  double beta = 0.5;
};

struct FlipParams {
  bool flipped = false;
};

struct JitterParams {
  double brightness = 0.0;
  double contrast = 1.0;
};

struct AugResult {
  Scene scene;
  std::vector<BoxProvenance> provenance;  // parallel to scene.gts
  std::size_t pre_clip_count = 0;
};

/// Nearest-neighbour resize of `src` by `scale`; the result is
/// max(1, round(w * scale)) x max(1, round(h * scale)). Returns the exact
/// per-axis factors actually applied.
Image resize_nearest(const Image& src, double scale, double& sx, double& sy);

/// Draw order (each site has its own child stream of `rng`):
///   "mosaic.center": center_x, then center_y
///   "mosaic.scale":  quadrant 0..3 scale factors
///   "mosaic.crop":   crop_x, then crop_y
MosaicParams sample_mosaic(const AugConfig& cfg, int out_h, int out_w, const SplitMix64& rng);
/// 2H x 2W workspace split at the center; quadrant i gets scenes[i] scaled by
/// scales[i] with its inner corner at the center; the workspace is then
/// cropped to out_h x out_w.
AugResult mosaic_apply(std::span<const Scene> scenes, int out_h, int out_w, const MosaicParams& p,
                       const AugConfig& cfg);
AugResult mosaic(std::span<const Scene> scenes, int out_h, int out_w, const AugConfig& cfg, const SplitMix64& rng,
                 MosaicParams* drawn = nullptr);

/// "mixup.scale": scale_a, scale_b; "mixup.blend": beta.
MixupParams sample_mixup(const AugConfig& cfg, const SplitMix64& rng);
/// out = round_half_up(beta * a' + (1 - beta) * b'), where a', b' are each
/// scaled and anchored at the top-left of the common canvas.
AugResult mixup_apply(const Scene& a, const Scene& b, const MixupParams& p, const AugConfig& cfg);
AugResult mixup(const Scene& a, const Scene& b, const AugConfig& cfg, const SplitMix64& rng,
                MixupParams* drawn = nullptr);

/// "hflip": one uniform; flip when it is below flip_prob.
FlipParams sample_hflip(const AugConfig& cfg, const SplitMix64& rng);
AugResult hflip_apply(const Scene& s, const FlipParams& p, const AugConfig& cfg);
AugResult hflip(const Scene& s, const AugConfig& cfg, const SplitMix64& rng, FlipParams* drawn = nullptr);

/// "color": brightness, then contrast.
JitterParams sample_color_jitter(const AugConfig& cfg, const SplitMix64& rng);
/// out = clamp(round_half_up(contrast * (p - 128) + 128 + brightness), 0, 255).
AugResult color_jitter_apply(const Scene& s, const JitterParams& p);
AugResult color_jitter(const Scene& s, const AugConfig& cfg, const SplitMix64& rng, JitterParams* drawn = nullptr);

std::uint8_t round_pixel(double v) noexcept;

}  // namespace simota
