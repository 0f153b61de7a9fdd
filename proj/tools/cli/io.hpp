#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"
#include "simota/evalmap.hpp"
#include "simota/image.hpp"
#include "simota/postprocess.hpp"

namespace simota::cli {

namespace fs = std::filesystem;

Json read_json_file(const fs::path& path);
/// Pretty-printed with a trailing newline.
void write_json_file(const fs::path& path, const Json& j);
void write_text_file(const fs::path& path, const std::string& text);

Json box_to_json(const LabeledBox& b);
LabeledBox box_from_json(const Json& j, const std::string& where);

/// {id, width, height, image, gts}; `image` is resolved relative to the
/// JSON file. Throws ValidationError when the PPM is missing or its size
/// disagrees with width/height, or the gts break Scene invariants.
Scene read_scene(const fs::path& path);
/// Writes <dir>/<stem>.ppm and <dir>/<stem>.json; returns the JSON path.
fs::path write_scene(const fs::path& dir, const std::string& stem, const Scene& scene);
Json scene_to_json(const Scene& scene, const std::string& image_name);

Json detection_to_json(const Detection& d);
Detection detection_from_json(const Json& j, const std::string& where);

/// {"images": [{"gts": [...], "dets": [{cx, cy, w, h, class_id, score}]}]}
std::vector<EvalImage> read_eval_input(const fs::path& path);

/// {"predictions": [{"t": [tx, ty, tw, th], "obj": z, "cls": [z...]}]}
std::vector<RawPrediction> read_predictions(const fs::path& path);
Json predictions_to_json(const std::vector<RawPrediction>& preds);

/// Shortest round-trip decimal form (same as the JSON writer).
std::string format_double(double v);

}  // namespace simota::cli
