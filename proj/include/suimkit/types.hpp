#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace suim {

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Rgb {
  uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

// Interleaved 8-bit RGB raster, row-major, origin top-left.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // 3 * width * height

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), pixels(size_t(3) * w * h, 0) {}

  Rgb at(int x, int y) const {
    size_t i = 3 * (size_t(y) * width + x);
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }
  void set(int x, int y, Rgb c) {
    size_t i = 3 * (size_t(y) * width + x);
    pixels[i] = c.r;
    pixels[i + 1] = c.g;
    pixels[i + 2] = c.b;
  }
  size_t pixel_count() const { return size_t(width) * height; }
  bool empty() const { return width <= 0 || height <= 0; }
};

// Per-pixel class indices 0..7, the canonical mask representation.
struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> labels;  // width * height

  LabelMap() = default;
  LabelMap(int w, int h, uint8_t fill = 0)
      : width(w), height(h), labels(size_t(w) * h, fill) {}

  uint8_t at(int x, int y) const { return labels[size_t(y) * width + x]; }
  void set(int x, int y, uint8_t v) { labels[size_t(y) * width + x] = v; }
  size_t size() const { return labels.size(); }
  bool operator==(const LabelMap&) const = default;
};

// Single-channel 0/1 mask.
struct BinaryMap {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> data;  // width * height, values 0 or 1

  BinaryMap() = default;
  BinaryMap(int w, int h, uint8_t fill = 0)
      : width(w), height(h), data(size_t(w) * h, fill) {}

  uint8_t at(int x, int y) const { return data[size_t(y) * width + x]; }
  void set(int x, int y, uint8_t v) { data[size_t(y) * width + x] = v; }
  size_t size() const { return data.size(); }
  bool operator==(const BinaryMap&) const = default;
};

// Single-channel real-valued map, e.g. one soft output channel.
struct RealMap {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  RealMap() = default;
  RealMap(int w, int h, double fill = 0.0)
      : width(w), height(h), data(size_t(w) * h, fill) {}

  double at(int x, int y) const { return data[size_t(y) * width + x]; }
  void set(int x, int y, double v) { data[size_t(y) * width + x] = v; }
  size_t size() const { return data.size(); }
};

}  // namespace suim
