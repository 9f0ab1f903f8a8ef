#pragma once

#include <string>

#include "suimkit/types.hpp"

namespace suim {

// Reads PNG, JPEG, BMP or PPM/PGM, sniffed by magic bytes. Grayscale
// sources are expanded to RGB. Throws IoError naming the path on failure.
RgbImage read_image(const std::string& path);

// Writes by extension: .png (default), .ppm, .bmp. PPM output is binary
// P6 with a fixed header, so identical pixels give identical bytes.
void write_image(const RgbImage& image, const std::string& path);

// 8-bit single-channel rasters; .png or .pgm by extension.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, uint8_t fill = 0)
      : width(w), height(h), pixels(size_t(w) * h, fill) {}
};

GrayImage read_gray(const std::string& path);
void write_gray(const GrayImage& image, const std::string& path);

}  // namespace suim
