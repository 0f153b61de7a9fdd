#include "io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "simota/errors.hpp"

namespace simota::cli {

Json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError(path.string() + ": malformed JSON: " + e.what());
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
  if (!out) throw ValidationError("write failed: " + path.string());
}

void write_json_file(const fs::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

double number_at(const Json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) throw ValidationError(where + ": missing '" + key + "'");
  if (!it->is_number()) throw ValidationError(where + "." + key + ": expected a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw ValidationError(where + "." + key + ": expected a finite number");
  return v;
}

int int_at(const Json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) throw ValidationError(where + ": missing '" + key + "'");
  if (!it->is_number_integer()) throw ValidationError(where + "." + key + ": expected an integer");
  return it->get<int>();
}

void only_keys(const Json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || item.key() == k;
    if (!known) throw ValidationError(where + "." + item.key() + ": unknown key");
  }
}

const Json& array_at(const Json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) throw ValidationError(where + ": missing '" + key + "'");
  if (!it->is_array()) throw ValidationError(where + "." + key + ": expected an array");
  return *it;
}

}  // namespace

Json box_to_json(const LabeledBox& b) {
  return Json{{"cx", b.box.cx}, {"cy", b.box.cy}, {"w", b.box.w}, {"h", b.box.h}, {"class_id", b.class_id}};
}

LabeledBox box_from_json(const Json& j, const std::string& where) {
  only_keys(j, {"cx", "cy", "w", "h", "class_id"}, where);
  return {{number_at(j, "cx", where), number_at(j, "cy", where), number_at(j, "w", where), number_at(j, "h", where)},
          int_at(j, "class_id", where)};
}

Json scene_to_json(const Scene& scene, const std::string& image_name) {
  Json gts = Json::array();
  for (const auto& g : scene.gts) gts.push_back(box_to_json(g));
  return Json{{"id", scene.id}, {"width", scene.width()}, {"height", scene.height()}, {"image", image_name}, {"gts", gts}};
}

Scene read_scene(const fs::path& path) {
  const Json j = read_json_file(path);
  const std::string where = path.string();
  only_keys(j, {"id", "width", "height", "image", "gts"}, where);
  if (!j.contains("id") || !j["id"].is_string()) throw ValidationError(where + ".id: expected a string");
  if (!j.contains("image") || !j["image"].is_string()) throw ValidationError(where + ".image: expected a string");
  const int width = int_at(j, "width", where);
  const int height = int_at(j, "height", where);

  Scene s;
  s.id = j["id"].get<std::string>();
  fs::path img = j["image"].get<std::string>();
  if (img.is_relative()) img = path.parent_path() / img;
  if (!fs::exists(img)) throw ValidationError(where + ".image: " + img.string() + " does not exist");
  s.image = read_ppm(img);
  if (s.image.width != width || s.image.height != height)
    throw ValidationError(where + ": image is " + std::to_string(s.image.width) + "x" +
                          std::to_string(s.image.height) + " but the scene declares " + std::to_string(width) + "x" +
                          std::to_string(height));
  const Json& gts = array_at(j, "gts", where);
  for (std::size_t i = 0; i < gts.size(); ++i)
    s.gts.push_back(box_from_json(gts[i], where + ".gts[" + std::to_string(i) + "]"));
  try {
    s.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
  return s;
}

fs::path write_scene(const fs::path& dir, const std::string& stem, const Scene& scene) {
  fs::create_directories(dir);
  write_ppm(dir / (stem + ".ppm"), scene.image);
  const auto json_path = dir / (stem + ".json");
  write_json_file(json_path, scene_to_json(scene, stem + ".ppm"));
  return json_path;
}

Json detection_to_json(const Detection& d) {
  return Json{{"cx", d.box.cx}, {"cy", d.box.cy},       {"w", d.box.w},
              {"h", d.box.h},   {"class_id", d.class_id}, {"score", d.score}, {"anchor", d.anchor_index}};
}

Detection detection_from_json(const Json& j, const std::string& where) {
  only_keys(j, {"cx", "cy", "w", "h", "class_id", "score", "anchor"}, where);
  Detection d;
  d.box = {number_at(j, "cx", where), number_at(j, "cy", where), number_at(j, "w", where), number_at(j, "h", where)};
  d.class_id = int_at(j, "class_id", where);
  d.score = number_at(j, "score", where);
  if (j.contains("anchor")) {
    if (!j["anchor"].is_number_unsigned()) throw ValidationError(where + ".anchor: expected a non-negative integer");
    d.anchor_index = j["anchor"].get<std::size_t>();
  }
  return d;
}

std::vector<EvalImage> read_eval_input(const fs::path& path) {
  const Json j = read_json_file(path);
  const std::string where = path.string();
  only_keys(j, {"images"}, where);
  const Json& images = array_at(j, "images", where);
  std::vector<EvalImage> out;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string w = where + ".images[" + std::to_string(i) + "]";
    only_keys(images[i], {"gts", "dets"}, w);
    EvalImage im;
    const Json& gts = array_at(images[i], "gts", w);
    for (std::size_t k = 0; k < gts.size(); ++k)
      im.gts.push_back(box_from_json(gts[k], w + ".gts[" + std::to_string(k) + "]"));
    const Json& dets = array_at(images[i], "dets", w);
    for (std::size_t k = 0; k < dets.size(); ++k) {
      auto d = detection_from_json(dets[k], w + ".dets[" + std::to_string(k) + "]");
      if (!dets[k].contains("anchor")) d.anchor_index = k;
      im.dets.push_back(d);
    }
    out.push_back(std::move(im));
  }
  return out;
}

std::vector<RawPrediction> read_predictions(const fs::path& path) {
  const Json j = read_json_file(path);
  const std::string where = path.string();
  only_keys(j, {"predictions"}, where);
  const Json& preds = array_at(j, "predictions", where);
  std::vector<RawPrediction> out;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const std::string w = where + ".predictions[" + std::to_string(i) + "]";
    only_keys(preds[i], {"t", "obj", "cls"}, w);
    RawPrediction p;
    const Json& t = array_at(preds[i], "t", w);
    if (t.size() != 4) throw ValidationError(w + ".t: expected 4 numbers");
    for (std::size_t k = 0; k < 4; ++k) {
      if (!t[k].is_number()) throw ValidationError(w + ".t[" + std::to_string(k) + "]: expected a number");
      p.t[k] = t[k].get<double>();
    }
    p.obj_logit = number_at(preds[i], "obj", w);
    const Json& cls = array_at(preds[i], "cls", w);
    for (std::size_t k = 0; k < cls.size(); ++k) {
      if (!cls[k].is_number()) throw ValidationError(w + ".cls[" + std::to_string(k) + "]: expected a number");
      p.cls_logits.push_back(cls[k].get<double>());
    }
    out.push_back(std::move(p));
  }
  return out;
}

Json predictions_to_json(const std::vector<RawPrediction>& preds) {
  Json arr = Json::array();
  for (const auto& p : preds) arr.push_back(Json{{"t", p.t}, {"obj", p.obj_logit}, {"cls", p.cls_logits}});
  return Json{{"predictions", arr}};
}

}  // namespace simota::cli
