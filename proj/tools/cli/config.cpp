#include "config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "simota/errors.hpp"

namespace simota::cli {

FpnSpec FpnConfig::resolve(int scene_height, int scene_width) const {
  FpnSpec s;
  s.strides = strides;
  s.height = height.value_or(scene_height);
  s.width = width.value_or(scene_width);
  s.scale_ranges = scale_ranges;
  s.validate();
  return s;
}

AugConfig preset_config(const std::string& name) {
  if (name == "small") return AugConfig::small_preset();
  if (name == "large") return AugConfig::large_preset();
  throw ValidationError("unknown preset '" + name + "' (small|large)");
}

void apply_preset(RunConfig& c, const std::string& name) {
  const auto p = preset_config(name);
  c.preset = name;
  c.augment.scale_jitter = p.scale_jitter;
  c.augment.mixup_enabled = p.mixup_enabled;
}

Json number_or_null(double v) {
  if (std::isinf(v) && v > 0) return nullptr;
  return v;
}

namespace {

/// Reads the keys of one JSON object, remembering which were consumed so
/// anything left over can be reported.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "config" : path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ValidationError("config: " + where + ": " + what);
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const Json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <typename Fn>
  void object(const std::string& key, Fn&& fn) {
    if (const Json* v = find(key)) {
      Reader sub(*v, at(key));
      fn(sub);
      sub.finish();
    }
  }

  void number(const std::string& key, double& out) {
    if (const Json* v = find(key)) out = as_number(*v, at(key));
  }

  /// null reads as +inf.
  void number_inf(const std::string& key, double& out) {
    if (const Json* v = find(key)) out = v->is_null() ? std::numeric_limits<double>::infinity() : as_number(*v, at(key));
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) {
    if (const Json* v = find(key)) out = as_integer<Int>(*v, at(key));
  }

  template <typename Int>
  void integer(const std::string& key, std::optional<Int>& out) {
    if (const Json* v = find(key)) {
      if (v->is_null())
        out.reset();
      else
        out = as_integer<Int>(*v, at(key));
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const Json* v = find(key)) {
      if (!v->is_boolean()) fail(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const Json* v = find(key)) {
      if (!v->is_string()) fail(at(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void range(const std::string& key, Range& out) {
    if (const Json* v = find(key)) {
      if (!v->is_array() || v->size() != 2) fail(at(key), "expected [lo, hi]");
      out = {as_number((*v)[0], at(key) + "[0]"), as_number((*v)[1], at(key) + "[1]")};
    }
  }

  template <typename Fn>
  void array(const std::string& key, Fn&& fn) {
    if (const Json* v = find(key)) {
      if (!v->is_array()) fail(at(key), "expected an array");
      fn(*v, at(key));
    }
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) fail(at(item.key()), "unknown key");
  }

  static double as_number(const Json& v, const std::string& where) {
    if (!v.is_number()) fail(where, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(where, "expected a finite number");
    return d;
  }

  template <typename Int>
  static Int as_integer(const Json& v, const std::string& where) {
    if (!v.is_number_integer()) fail(where, "expected an integer");
    if constexpr (std::is_unsigned_v<Int>) {
      if (!v.is_number_unsigned()) fail(where, "expected a non-negative integer");
      const auto u = v.get<std::uint64_t>();
      if (u > std::numeric_limits<Int>::max()) fail(where, "integer out of range");
      return static_cast<Int>(u);
    } else {
      const auto i = v.get<std::int64_t>();
      if (i < std::numeric_limits<Int>::min() || i > std::numeric_limits<Int>::max())
        fail(where, "integer out of range");
      return static_cast<Int>(i);
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

CenterMode parse_center_mode(const std::string& s, const std::string& where) {
  if (s == "cell3x3") return CenterMode::cell3x3;
  if (s == "radius") return CenterMode::radius;
  Reader::fail(where, "expected cell3x3 or radius");
}

IouVariant parse_variant(const std::string& s, const std::string& where) {
  if (s == "iou") return IouVariant::iou;
  if (s == "giou") return IouVariant::giou;
  Reader::fail(where, "expected iou or giou");
}

}  // namespace

RunConfig parse_run_config(const Json& j, RunConfig c) {
  Reader r(j, "");
  r.integer("seed", c.seed);
  r.integer("threads", c.threads);

  r.object("fpn", [&](Reader& f) {
    f.array("strides", [&](const Json& a, const std::string& where) {
      c.fpn.strides.clear();
      for (std::size_t i = 0; i < a.size(); ++i)
        c.fpn.strides.push_back(Reader::as_integer<int>(a[i], where + "[" + std::to_string(i) + "]"));
    });
    f.integer("height", c.fpn.height);
    f.integer("width", c.fpn.width);
    f.array("scale_ranges", [&](const Json& a, const std::string& where) {
      c.fpn.scale_ranges.clear();
      for (std::size_t i = 0; i < a.size(); ++i) {
        const std::string w = where + "[" + std::to_string(i) + "]";
        if (!a[i].is_array() || a[i].size() != 2) Reader::fail(w, "expected [lo, hi]");
        const double lo = Reader::as_number(a[i][0], w + "[0]");
        const double hi =
            a[i][1].is_null() ? std::numeric_limits<double>::infinity() : Reader::as_number(a[i][1], w + "[1]");
        c.fpn.scale_ranges.emplace_back(lo, hi);
      }
    });
  });

  r.object("assigner", [&](Reader& a) {
    a.number("lambda", c.assigner.lambda);
    std::string mode;
    a.string("center_mode", mode);
    if (!mode.empty()) c.assigner.center_mode = parse_center_mode(mode, a.at("center_mode"));
    a.number("center_radius", c.assigner.center_radius);
    a.integer("q", c.assigner.q);
    a.number("offcenter_penalty", c.assigner.offcenter_penalty);
    a.integer("k_cap", c.assigner.k_cap);
  });

  r.object("sinkhorn", [&](Reader& s) {
    s.number("eps", c.sinkhorn.eps);
    s.integer("max_iters", c.sinkhorn.max_iters);
    s.number("tol", c.sinkhorn.tol);
  });

  r.object("augment", [&](Reader& a) {
    std::string preset;
    a.string("preset", preset);
    if (!preset.empty()) {
      c.augment = preset_config(preset);
      c.preset = preset;
    }
    a.range("scale_jitter", c.augment.scale_jitter);
    a.boolean("mixup_enabled", c.augment.mixup_enabled);
    a.range("mixup_blend", c.augment.mixup_blend);
    a.number("flip_prob", c.augment.flip_prob);
    a.number("brightness", c.augment.brightness);
    a.number("contrast", c.augment.contrast);
    a.number("mosaic_center_jitter", c.augment.mosaic_center_jitter);
    a.integer("fill_value", c.augment.fill_value);
    a.object("clip", [&](Reader& k) {
      k.number("min_box_area", c.augment.clip.min_box_area);
      k.number("min_side", c.augment.clip.min_side);
    });
    a.integer("out_height", c.augment_out_height);
    a.integer("out_width", c.augment_out_width);
  });

  r.object("loss", [&](Reader& l) {
    l.number("cls", c.loss.cls);
    l.number("obj", c.loss.obj);
    l.number("reg", c.loss.reg);
    std::string variant;
    l.string("variant", variant);
    if (!variant.empty()) c.loss.variant = parse_variant(variant, l.at("variant"));
    l.boolean("obj_target_iou", c.loss.obj_target_iou);
  });

  r.object("fit", [&](Reader& f) {
    f.integer("steps", c.fit.steps);
    f.number("step_size", c.fit.step_size);
    std::string name;
    f.string("assigner", name);
    if (!name.empty()) c.fit.assigner = parse_assigner(name);
    f.integer("reassign_every", c.fit.reassign_every);
    f.number("init_noise", c.fit.init_noise);
    f.number("prior_shift", c.fit.prior_shift);
    std::string opt;
    f.string("optimizer", opt);
    if (!opt.empty()) c.fit.optimizer = parse_optimizer(opt);
    f.number("adam_beta1", c.fit.adam_beta1);
    f.number("adam_beta2", c.fit.adam_beta2);
    f.boolean("cosine_decay", c.fit.cosine_decay);
    f.number("loss_threshold", c.fit.loss_threshold);
    f.number("score_threshold", c.fit.score_threshold);
    f.number("nms_iou", c.fit.nms_iou);
    f.integer("num_classes", c.fit.num_classes);
  });

  r.object("scenes", [&](Reader& s) {
    s.integer("count", c.scenes.count);
    s.integer("objects", c.scenes.objects);
    s.integer("size", c.scenes.gen.size);
    s.integer("num_classes", c.scenes.gen.num_classes);
    s.number("max_overlap_iou", c.scenes.gen.max_overlap_iou);
  });

  r.object("eval", [&](Reader& e) {
    e.array("thresholds", [&](const Json& a, const std::string& where) {
      c.eval_thresholds.clear();
      for (std::size_t i = 0; i < a.size(); ++i)
        c.eval_thresholds.push_back(Reader::as_number(a[i], where + "[" + std::to_string(i) + "]"));
    });
  });
  r.finish();

  c.assigner.validate();
  c.augment.validate();
  c.fit.validate();
  if (c.sinkhorn.max_iters < 1 || !(c.sinkhorn.eps > 0.0) || !(c.sinkhorn.tol > 0.0))
    throw ValidationError("config: sinkhorn: eps and tol must be > 0, max_iters >= 1");
  if (c.scenes.count < 0 || c.scenes.objects < 0) throw ValidationError("config: scenes: count and objects must be >= 0");
  for (double t : c.eval_thresholds)
    if (!(t > 0.0 && t <= 1.0)) throw ValidationError("config: eval.thresholds must lie in (0, 1]");
  return c;
}

RunConfig load_run_config(const std::string& path, RunConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("config: cannot open " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError("config: " + path + ": malformed JSON: " + e.what());
  }
  return parse_run_config(j, std::move(base));
}

Json to_json(const FpnSpec& s) {
  Json ranges = Json::array();
  for (const auto& [lo, hi] : s.scale_ranges) ranges.push_back(Json::array({lo, number_or_null(hi)}));
  return Json{{"strides", s.strides}, {"height", s.height}, {"width", s.width}, {"scale_ranges", ranges}};
}

Json to_json(const RunConfig& c) {
  Json fpn;
  fpn["strides"] = c.fpn.strides;
  if (c.fpn.height) fpn["height"] = *c.fpn.height;
  if (c.fpn.width) fpn["width"] = *c.fpn.width;
  Json ranges = Json::array();
  for (const auto& [lo, hi] : c.fpn.scale_ranges) ranges.push_back(Json::array({lo, number_or_null(hi)}));
  fpn["scale_ranges"] = ranges;

  Json aug{{"preset", c.preset},
           {"scale_jitter", {c.augment.scale_jitter.lo, c.augment.scale_jitter.hi}},
           {"mixup_enabled", c.augment.mixup_enabled},
           {"mixup_blend", {c.augment.mixup_blend.lo, c.augment.mixup_blend.hi}},
           {"flip_prob", c.augment.flip_prob},
           {"brightness", c.augment.brightness},
           {"contrast", c.augment.contrast},
           {"mosaic_center_jitter", c.augment.mosaic_center_jitter},
           {"fill_value", c.augment.fill_value},
           {"clip", {{"min_box_area", c.augment.clip.min_box_area}, {"min_side", c.augment.clip.min_side}}}};
  if (c.augment_out_height) aug["out_height"] = *c.augment_out_height;
  if (c.augment_out_width) aug["out_width"] = *c.augment_out_width;

  const auto& f = c.fit;
  return Json{
      {"seed", c.seed},
      {"threads", c.threads},
      {"fpn", fpn},
      {"assigner",
       {{"lambda", c.assigner.lambda},
        {"center_mode", c.assigner.center_mode == CenterMode::radius ? "radius" : "cell3x3"},
        {"center_radius", c.assigner.center_radius},
        {"q", c.assigner.q},
        {"offcenter_penalty", c.assigner.offcenter_penalty},
        {"k_cap", c.assigner.k_cap}}},
      {"sinkhorn", {{"eps", c.sinkhorn.eps}, {"max_iters", c.sinkhorn.max_iters}, {"tol", c.sinkhorn.tol}}},
      {"augment", aug},
      {"loss",
       {{"cls", c.loss.cls},
        {"obj", c.loss.obj},
        {"reg", c.loss.reg},
        {"variant", c.loss.variant == IouVariant::iou ? "iou" : "giou"},
        {"obj_target_iou", c.loss.obj_target_iou}}},
      {"fit",
       {{"steps", f.steps},
        {"step_size", f.step_size},
        {"assigner", to_string(f.assigner)},
        {"reassign_every", f.reassign_every},
        {"init_noise", f.init_noise},
        {"prior_shift", f.prior_shift},
        {"optimizer", to_string(f.optimizer)},
        {"adam_beta1", f.adam_beta1},
        {"adam_beta2", f.adam_beta2},
        {"cosine_decay", f.cosine_decay},
        {"loss_threshold", f.loss_threshold},
        {"score_threshold", f.score_threshold},
        {"nms_iou", f.nms_iou},
        {"num_classes", f.num_classes}}},
      {"scenes",
       {{"count", c.scenes.count},
        {"objects", c.scenes.objects},
        {"size", c.scenes.gen.size},
        {"num_classes", c.scenes.gen.num_classes},
        {"max_overlap_iou", c.scenes.gen.max_overlap_iou}}},
      {"eval", {{"thresholds", c.eval_thresholds}}}};
}

}  // namespace simota::cli
