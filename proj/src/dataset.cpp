#include "suimkit/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <map>

#include "suimkit/image_io.hpp"

namespace fs = std::filesystem;

namespace suim {

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = char(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// stem -> path for every image file directly inside `dir`.
std::map<std::string, std::string> index_dir(const fs::path& dir) {
  std::map<std::string, std::string> out;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && has_image_extension(e.path().string()))
      files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const fs::path& p : files) {
    const std::string stem = p.stem().string();
    if (!out.emplace(stem, p.string()).second)
      throw ConfigError("duplicate stem '" + stem + "' in " + dir.string());
  }
  return out;
}

}  // namespace

bool has_image_extension(const std::string& path) {
  const std::string ext = lower(fs::path(path).extension().string());
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp" ||
         ext == ".ppm" || ext == ".pgm";
}

CorpusManifest scan_corpus(const std::string& root) {
  const fs::path images = fs::path(root) / "images";
  const fs::path masks = fs::path(root) / "masks";
  if (!fs::is_directory(images) || !fs::is_directory(masks))
    throw IoError("corpus layout: expected " + root + "/images and " + root +
                  "/masks");

  const auto img_index = index_dir(images);
  const auto mask_index = index_dir(masks);

  CorpusManifest m;
  m.root = root;
  for (const auto& [stem, path] : img_index) {
    auto it = mask_index.find(stem);
    if (it == mask_index.end())
      m.orphan_images.push_back(stem);
    else
      m.pairs.push_back({stem, path, it->second});
  }
  for (const auto& [stem, path] : mask_index)
    if (!img_index.count(stem)) m.orphan_masks.push_back(stem);
  return m;
}

std::vector<FilePair> pair_by_stem(const std::string& dir_a,
                                   const std::string& dir_b,
                                   std::vector<std::string>* only_a,
                                   std::vector<std::string>* only_b) {
  if (!fs::is_directory(dir_a) || !fs::is_directory(dir_b))
    throw IoError("pair_by_stem: both arguments must be directories");
  const auto a = index_dir(dir_a);
  const auto b = index_dir(dir_b);
  std::vector<FilePair> out;
  for (const auto& [stem, path] : a) {
    auto it = b.find(stem);
    if (it != b.end())
      out.push_back({stem, path, it->second});
    else if (only_a)
      only_a->push_back(stem);
  }
  if (only_b)
    for (const auto& [stem, path] : b)
      if (!a.count(stem)) only_b->push_back(stem);
  return out;
}

RgbImage resize_bilinear(const RgbImage& src, int width, int height) {
  if (width < 1 || height < 1)
    throw ConfigError("resize: target dims must be positive");
  if (src.empty()) throw ShapeError("resize: empty source");
  if (src.width == width && src.height == height) return src;

  RgbImage out(width, height);
  const double sx = double(src.width) / width;
  const double sy = double(src.height) / height;
  auto clampi = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };
  for (int y = 0; y < height; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    const int y0 = clampi(int(std::floor(fy)), src.height - 1);
    const int y1 = clampi(y0 + 1, src.height - 1);
    const double wy = std::clamp(fy - std::floor(fy), 0.0, 1.0);
    const double ty = fy < 0 ? 0.0 : wy;  // clamp above the top edge
    for (int x = 0; x < width; ++x) {
      const double fx = (x + 0.5) * sx - 0.5;
      const int x0 = clampi(int(std::floor(fx)), src.width - 1);
      const int x1 = clampi(x0 + 1, src.width - 1);
      const double wx = std::clamp(fx - std::floor(fx), 0.0, 1.0);
      const double tx = fx < 0 ? 0.0 : wx;
      const Rgb p00 = src.at(x0, y0), p10 = src.at(x1, y0);
      const Rgb p01 = src.at(x0, y1), p11 = src.at(x1, y1);
      auto lerp2 = [&](uint8_t a00, uint8_t a10, uint8_t a01, uint8_t a11) {
        const double top = a00 + (a10 - a00) * tx;
        const double bot = a01 + (a11 - a01) * tx;
        const double v = top + (bot - top) * ty;
        return uint8_t(std::clamp(long(std::lround(v)), 0L, 255L));
      };
      out.set(x, y,
              {lerp2(p00.r, p10.r, p01.r, p11.r),
               lerp2(p00.g, p10.g, p01.g, p11.g),
               lerp2(p00.b, p10.b, p01.b, p11.b)});
    }
  }
  return out;
}

RgbImage resize_nearest(const RgbImage& src, int width, int height) {
  if (width < 1 || height < 1)
    throw ConfigError("resize: target dims must be positive");
  if (src.empty()) throw ShapeError("resize: empty source");
  if (src.width == width && src.height == height) return src;

  RgbImage out(width, height);
  const double sx = double(src.width) / width;
  const double sy = double(src.height) / height;
  for (int y = 0; y < height; ++y) {
    const int yy = std::min(src.height - 1, int(std::floor((y + 0.5) * sy)));
    for (int x = 0; x < width; ++x) {
      const int xx = std::min(src.width - 1, int(std::floor((x + 0.5) * sx)));
      out.set(x, y, src.at(xx, yy));
    }
  }
  return out;
}

LoadedPair load_pair(const PairEntry& entry, int width, int height,
                     int color_threshold) {
  LoadedPair p;
  p.stem = entry.stem;
  p.image = resize_bilinear(read_image(entry.image_path), width, height);
  const RgbImage mask_rgb =
      resize_nearest(read_image(entry.mask_path), width, height);
  p.mask = decode_mask(mask_rgb, color_threshold);
  return p;
}

LabelMap load_mask(const std::string& path, int color_threshold) {
  return decode_mask(read_image(path), color_threshold);
}

}  // namespace suim
