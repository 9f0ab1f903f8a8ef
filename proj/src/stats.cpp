#include "suimkit/stats.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace suim {

namespace {

// Presence means >= 1 pixel of the class.
std::array<bool, kNumCategories> presence(const LabelMap& mask) {
  std::array<bool, kNumCategories> seen{};
  for (uint8_t v : mask.labels) seen[v] = true;
  return seen;
}

}  // namespace

std::array<size_t, kNumCategories> occurrence_counts(
    const std::vector<LabelMap>& masks) {
  if (masks.empty()) throw ConfigError("occurrence_counts: empty collection");
  std::array<size_t, kNumCategories> counts{};
  for (const LabelMap& m : masks) {
    auto seen = presence(m);
    for (int c = 0; c < kNumCategories; ++c)
      if (seen[c]) ++counts[c];
  }
  return counts;
}

std::array<std::array<double, kNumCategories>, kNumCategories>
occurrence_correlation(const std::vector<LabelMap>& masks) {
  if (masks.size() < 2)
    throw ConfigError("occurrence_correlation: needs at least 2 masks");

  const size_t n = masks.size();
  std::vector<std::array<bool, kNumCategories>> ind(n);
  for (size_t i = 0; i < n; ++i) ind[i] = presence(masks[i]);

  std::array<double, kNumCategories> sum{};
  std::array<std::array<double, kNumCategories>, kNumCategories> cross{};
  for (size_t i = 0; i < n; ++i)
    for (int a = 0; a < kNumCategories; ++a) {
      if (!ind[i][a]) continue;
      sum[a] += 1.0;
      for (int b = 0; b < kNumCategories; ++b)
        if (ind[i][b]) cross[a][b] += 1.0;
    }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::array<std::array<double, kNumCategories>, kNumCategories> corr;
  for (int a = 0; a < kNumCategories; ++a)
    for (int b = 0; b < kNumCategories; ++b) {
      double va = n * sum[a] - sum[a] * sum[a];  // n^2 * variance
      double vb = n * sum[b] - sum[b] * sum[b];
      if (va <= 0.0 || vb <= 0.0) {
        corr[a][b] = nan;
        continue;
      }
      double cov = n * cross[a][b] - sum[a] * sum[b];
      corr[a][b] = cov / std::sqrt(va * vb);
    }
  return corr;
}

std::array<double, 3> mean_intensity(const RgbImage& image) {
  if (image.empty()) throw ShapeError("mean_intensity: empty image");
  double acc[3] = {0, 0, 0};
  const uint8_t* p = image.pixels.data();
  for (size_t i = 0; i < image.pixel_count(); ++i, p += 3) {
    acc[0] += p[0];
    acc[1] += p[1];
    acc[2] += p[2];
  }
  double n = double(image.pixel_count());
  return {acc[0] / n, acc[1] / n, acc[2] / n};
}

int intensity_bin(double value, int bins) {
  int b = int(std::floor(value * bins / 255.0));
  if (b < 0) b = 0;
  if (b > bins - 1) b = bins - 1;
  return b;
}

IntensityHistogram intensity_distribution(const std::vector<RgbImage>& images,
                                          int bins) {
  if (images.empty()) throw ConfigError("intensity_distribution: empty collection");
  if (bins < 1) throw ConfigError("intensity_distribution: bins must be >= 1");
  IntensityHistogram hist;
  hist.bins = bins;
  for (auto& ch : hist.counts) ch.assign(bins, 0);
  for (const RgbImage& img : images) {
    auto means = mean_intensity(img);
    for (int c = 0; c < 3; ++c) ++hist.counts[c][intensity_bin(means[c], bins)];
  }
  return hist;
}

std::string occurrence_csv(const std::array<size_t, kNumCategories>& counts) {
  std::ostringstream os;
  os << "category,images\n";
  for (int c = 0; c < kNumCategories; ++c)
    os << Palette::code_name(c) << ',' << counts[c] << '\n';
  return os.str();
}

std::string correlation_csv(
    const std::array<std::array<double, kNumCategories>, kNumCategories>& m) {
  std::ostringstream os;
  os.precision(12);
  os << "category";
  for (int c = 0; c < kNumCategories; ++c) os << ',' << Palette::code_name(c);
  os << '\n';
  for (int a = 0; a < kNumCategories; ++a) {
    os << Palette::code_name(a);
    for (int b = 0; b < kNumCategories; ++b) {
      os << ',';
      if (std::isnan(m[a][b])) os << "nan";
      else os << m[a][b];
    }
    os << '\n';
  }
  return os.str();
}

std::string intensity_csv(const IntensityHistogram& hist) {
  std::ostringstream os;
  os << "bin,red,green,blue\n";
  for (int b = 0; b < hist.bins; ++b)
    os << b << ',' << hist.counts[0][b] << ',' << hist.counts[1][b] << ','
       << hist.counts[2][b] << '\n';
  return os.str();
}

}  // namespace suim
