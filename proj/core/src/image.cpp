#include "simota/image.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <sstream>

#include "simota/errors.hpp"

namespace simota {

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string next_token(const std::string& s, std::size_t& pos) {
  for (;;) {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos < s.size() && s[pos] == '#') {
      while (pos < s.size() && s[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  const std::size_t start = pos;
  while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  return s.substr(start, pos - start);
}

int parse_dim(const std::string& tok, const char* what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v <= 0) throw ValidationError("");
    return v;
  } catch (const std::exception&) {
    throw ValidationError(std::string("ppm: bad ") + what + " '" + tok + "'");
  }
}

}  // namespace

Image decode_ppm(const std::string& bytes) {
  std::size_t pos = 0;
  if (next_token(bytes, pos) != "P6") throw ValidationError("ppm: not a binary P6 file");
  const int w = parse_dim(next_token(bytes, pos), "width");
  const int h = parse_dim(next_token(bytes, pos), "height");
  const int maxval = parse_dim(next_token(bytes, pos), "maxval");
  if (maxval != 255) throw ValidationError("ppm: only maxval 255 is supported");
  ++pos;  // single whitespace byte after maxval
  Image img(w, h);
  if (bytes.size() < pos + img.data.size()) throw ValidationError("ppm: truncated pixel data");
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), img.data.size(), img.data.begin());
  return img;
}

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("ppm: cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_ppm(bytes);
}

std::string encode_ppm(const Image& img) {
  std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(img.data.begin(), img.data.end());
  return out;
}

void write_ppm(const std::filesystem::path& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("ppm: cannot write " + path.string());
  const std::string bytes = encode_ppm(img);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void Scene::validate() const {
  if (image.width < 32 || image.height < 32) throw ValidationError("scene " + id + ": image must be at least 32x32");
  if (image.data.size() != static_cast<std::size_t>(image.width) * image.height * 3)
    throw ValidationError("scene " + id + ": pixel buffer size mismatch");
  for (std::size_t i = 0; i < gts.size(); ++i) {
    const auto& b = gts[i].box;
    if (!b.valid()) throw ValidationError("scene " + id + ": gt " + std::to_string(i) + " is not a valid box");
    if (b.x2() <= 0.0 || b.y2() <= 0.0 || b.x1() >= image.width || b.y1() >= image.height)
      throw ValidationError("scene " + id + ": gt " + std::to_string(i) + " does not intersect the canvas");
    if (gts[i].class_id < 0) throw ValidationError("scene " + id + ": gt " + std::to_string(i) + " has negative class");
  }
}

}  // namespace simota
