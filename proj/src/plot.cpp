#include "suimkit/plot.hpp"

#include <algorithm>
#include <cmath>

namespace suim {

namespace {

void fill_rect(RgbImage& img, int x0, int y0, int x1, int y1, Rgb c) {
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  x1 = std::min(x1, img.width);
  y1 = std::min(y1, img.height);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) img.set(x, y, c);
}

}  // namespace

RgbImage render_bar_chart(const std::vector<double>& values,
                          const std::vector<Rgb>& colors, int width,
                          int height) {
  if (values.empty()) throw ConfigError("bar chart: no values");
  RgbImage img(width, height);
  fill_rect(img, 0, 0, width, height, {255, 255, 255});

  double top = 0.0;
  for (double v : values) top = std::max(top, v);
  if (top <= 0.0) top = 1.0;

  const int margin = 8;
  const int base = height - margin;
  const int span = width - 2 * margin;
  const int n = int(values.size());
  const int slot = std::max(1, span / n);
  const int bar = std::max(1, slot * 3 / 4);
  for (int i = 0; i < n; ++i) {
    const Rgb c = colors.empty() ? Rgb{70, 110, 180} : colors[i % colors.size()];
    const double frac = std::clamp(values[i] / top, 0.0, 1.0);
    const int h = std::max(1, int(std::lround(frac * (base - margin))));
    const int x0 = margin + i * slot + (slot - bar) / 2;
    fill_rect(img, x0, base - h, x0 + bar, base, c);
  }
  fill_rect(img, margin, base, width - margin, base + 1, {40, 40, 40});
  return img;
}

RgbImage render_heatmap(const std::vector<double>& matrix, int n, int cell) {
  if (n < 1 || int(matrix.size()) != n * n)
    throw ShapeError("heatmap: matrix must be n*n");
  RgbImage img(n * cell, n * cell);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double v = matrix[size_t(r) * n + c];
      Rgb color{150, 150, 150};  // NaN
      if (!std::isnan(v)) {
        const double t = std::clamp(v, -1.0, 1.0);
        if (t >= 0) {
          const auto fade = uint8_t(std::lround(255.0 * (1.0 - t)));
          color = {255, fade, fade};
        } else {
          const auto fade = uint8_t(std::lround(255.0 * (1.0 + t)));
          color = {fade, fade, 255};
        }
      }
      fill_rect(img, c * cell, r * cell, (c + 1) * cell, (r + 1) * cell, color);
    }
  }
  return img;
}

RgbImage render_rgb_histogram(const IntensityHistogram& hist, int width,
                              int height) {
  if (hist.bins < 1) throw ConfigError("histogram: no bins");
  RgbImage img(width, height);
  fill_rect(img, 0, 0, width, height, {255, 255, 255});

  size_t top = 1;
  for (const auto& ch : hist.counts)
    for (size_t v : ch) top = std::max(top, v);

  const int margin = 8;
  const int base = height - margin;
  const int span = width - 2 * margin;
  const Rgb chan_color[3] = {{220, 60, 60}, {60, 170, 60}, {60, 60, 220}};
  for (int ch = 0; ch < 3; ++ch) {
    for (int b = 0; b < hist.bins; ++b) {
      const double frac = double(hist.counts[ch][size_t(b)]) / double(top);
      const int h = int(std::lround(frac * (base - margin)));
      if (h <= 0) continue;
      const int x0 = margin + b * span / hist.bins;
      const int x1 = margin + (b + 1) * span / hist.bins;
      // Thin step outline per channel so overlapping bins stay readable.
      fill_rect(img, x0, base - h, x1, base - h + 2, chan_color[ch]);
      fill_rect(img, x0, base - h, x0 + 1, base, chan_color[ch]);
      fill_rect(img, x1 - 1, base - h, x1, base, chan_color[ch]);
    }
  }
  fill_rect(img, margin, base, width - margin, base + 1, {40, 40, 40});
  return img;
}

}  // namespace suim
