#include "suimkit/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace suim {

AffineTransform sample_transform(const AugmentParams& params, std::mt19937_64& rng) {
  // Zero ranges skip the draw entirely so the component is exactly 0.
  auto uniform_pm = [&](double range) {
    if (range == 0.0) return 0.0;
    return std::uniform_real_distribution<double>(-range, range)(rng);
  };
  AffineTransform t;
  t.unit = params.unit;
  t.rotation = uniform_pm(params.rotation_range);
  t.shift_x = uniform_pm(params.width_shift);
  t.shift_y = uniform_pm(params.height_shift);
  t.shear = uniform_pm(params.shear_range);
  t.zoom_x = 1.0 + uniform_pm(params.zoom_range);
  t.zoom_y = 1.0 + uniform_pm(params.zoom_range);
  t.flip = params.horizontal_flip && std::bernoulli_distribution(0.5)(rng);
  return t;
}

void source_coords(const AffineTransform& t, int width, int height, double out_x,
                   double out_y, double& src_x, double& src_y) {
  double x = t.flip ? double(width - 1) - out_x : out_x;
  double cx = (width - 1) / 2.0;
  double cy = (height - 1) / 2.0;
  double u = x - cx;
  double v = out_y - cy;

  double to_rad =
      t.unit == AngleUnit::Degrees ? std::numbers::pi / 180.0 : 1.0;
  double theta = t.rotation * to_rad;
  double shear = t.shear * to_rad;
  double ct = std::cos(theta), st = std::sin(theta);
  double shs = std::sin(shear), shc = std::cos(shear);

  // M = R(theta) * Shear * Zoom, applied output -> source.
  double m00 = ct * t.zoom_x;
  double m01 = (-ct * shs - st * shc) * t.zoom_y;
  double m10 = st * t.zoom_x;
  double m11 = (-st * shs + ct * shc) * t.zoom_y;

  src_x = m00 * u + m01 * v + cx + t.shift_x * width;
  src_y = m10 * u + m11 * v + cy + t.shift_y * height;
}

namespace {

inline int clamp_idx(int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); }

Rgb sample_bilinear(const RgbImage& img, double sx, double sy) {
  int x0 = int(std::floor(sx));
  int y0 = int(std::floor(sy));
  double fx = sx - x0;
  double fy = sy - y0;
  int x0c = clamp_idx(x0, img.width - 1);
  int x1c = clamp_idx(x0 + 1, img.width - 1);
  int y0c = clamp_idx(y0, img.height - 1);
  int y1c = clamp_idx(y0 + 1, img.height - 1);
  Rgb p00 = img.at(x0c, y0c), p01 = img.at(x1c, y0c);
  Rgb p10 = img.at(x0c, y1c), p11 = img.at(x1c, y1c);
  auto mix = [&](double a, double b, double c, double d) {
    double v = (1.0 - fy) * ((1.0 - fx) * a + fx * b) +
               fy * ((1.0 - fx) * c + fx * d);
    long r = std::lround(v);
    return uint8_t(std::clamp(r, 0L, 255L));
  };
  return {mix(p00.r, p01.r, p10.r, p11.r), mix(p00.g, p01.g, p10.g, p11.g),
          mix(p00.b, p01.b, p10.b, p11.b)};
}

}  // namespace

std::pair<RgbImage, LabelMap> apply_pair(const RgbImage& image,
                                         const LabelMap& mask,
                                         const AffineTransform& t) {
  if (image.width != mask.width || image.height != mask.height)
    throw ShapeError("apply_pair: image/mask dimension mismatch");
  const int w = image.width, h = image.height;
  RgbImage out_img(w, h);
  LabelMap out_mask(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sx, sy;
      source_coords(t, w, h, x, y, sx, sy);
      out_img.set(x, y, sample_bilinear(image, sx, sy));
      // Mask: nearest neighbor, background outside the source raster.
      long mx = std::lround(sx);
      long my = std::lround(sy);
      uint8_t cls = 0;
      if (mx >= 0 && mx < w && my >= 0 && my < h)
        cls = mask.at(int(mx), int(my));
      out_mask.set(x, y, cls);
    }
  }
  return {std::move(out_img), std::move(out_mask)};
}

}  // namespace suim
