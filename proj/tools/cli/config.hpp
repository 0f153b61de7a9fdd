#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "simota/assigner.hpp"
#include "simota/augment.hpp"
#include "simota/gridhead.hpp"
#include "simota/losses.hpp"
#include "simota/synthfit.hpp"

namespace simota::cli {

using Json = nlohmann::ordered_json;

/// FPN geometry; height/width fall back to the scene size when unset.
struct FpnConfig {
  std::vector<int> strides{8, 16, 32};
  std::optional<int> height;
  std::optional<int> width;
  std::vector<std::pair<double, double>> scale_ranges = FpnSpec{}.scale_ranges;

  FpnSpec resolve(int scene_height, int scene_width) const;
};

struct SceneSetConfig {
  int count = 10;
  int objects = 5;
  SceneGenConfig gen{};
};

/// Everything a command can be configured with. Precedence when resolving:
/// command-line flags, then the --config file, then these defaults.
struct RunConfig {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string preset = "large";
  FpnConfig fpn{};
  AssignerConfig assigner{};
  SinkhornOptions sinkhorn{};
  AugConfig augment = AugConfig::large_preset();
  std::optional<int> augment_out_height;  // default: first input scene
  std::optional<int> augment_out_width;
  LossWeights loss{};
  FitConfig fit{};
  SceneSetConfig scenes{};
  std::vector<double> eval_thresholds = coco_thresholds();
};

/// Preset by name: "small" or "large". Throws ValidationError otherwise.
AugConfig preset_config(const std::string& name);

/// Overlay `j` onto `base`. Unknown keys and type mismatches throw
/// ValidationError naming the offending path (e.g. "fit.stpes").
RunConfig parse_run_config(const Json& j, RunConfig base = {});
RunConfig load_run_config(const std::string& path, RunConfig base = {});

/// Fully-resolved echo; parse_run_config(to_json(c)) reproduces c.
Json to_json(const RunConfig& c);
Json to_json(const FpnSpec& s);

/// Re-applies the preset's scale range and mixup switch, leaving other augment fields.
void apply_preset(RunConfig& c, const std::string& name);

/// +inf is written as null.
Json number_or_null(double v);

}  // namespace simota::cli
