#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "suimkit/palette.hpp"
#include "suimkit/types.hpp"

namespace suim {

// Count of images containing at least one pixel of each category.
std::array<size_t, kNumCategories> occurrence_counts(
    const std::vector<LabelMap>& masks);

// Phi coefficient (Pearson correlation of the binary presence indicators)
// between every pair of categories. Entries with a zero-variance indicator
// are NaN; the diagonal is 1 where defined. Requires >= 2 masks.
std::array<std::array<double, kNumCategories>, kNumCategories>
occurrence_correlation(const std::vector<LabelMap>& masks);

struct IntensityHistogram {
  int bins = 0;
  // Per RGB channel: counts of per-image mean intensities over `bins`
  // equal-width bins on [0,255].
  std::array<std::vector<size_t>, 3> counts;
};

// Mean intensity of one image per channel, each in [0,255].
std::array<double, 3> mean_intensity(const RgbImage& image);

// Maps a mean intensity to its bin: min(bins-1, floor(v * bins / 255)).
int intensity_bin(double value, int bins);

IntensityHistogram intensity_distribution(const std::vector<RgbImage>& images,
                                          int bins);

std::string occurrence_csv(const std::array<size_t, kNumCategories>& counts);
std::string correlation_csv(
    const std::array<std::array<double, kNumCategories>, kNumCategories>& m);
std::string intensity_csv(const IntensityHistogram& hist);

}  // namespace suim
