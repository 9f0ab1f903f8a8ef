#pragma once

#include <array>
#include <vector>

#include "suimkit/stats.hpp"
#include "suimkit/types.hpp"

namespace suim {

// Minimal chart renderers for the stats reports. Pure pixel pushing on
// white canvases; no text labels, just geometry and color.

// One bar per value, colored from `colors` (cycled if shorter). Bars are
// scaled to the max value; zero/negative values draw as baseline ticks.
RgbImage render_bar_chart(const std::vector<double>& values,
                          const std::vector<Rgb>& colors, int width = 640,
                          int height = 360);

// n x n matrix of values in [-1, 1]: blue for -1, white for 0, red for
// +1; NaN cells are gray.
RgbImage render_heatmap(const std::vector<double>& matrix, int n,
                        int cell = 40);

// Per-channel bin counts drawn as filled steps in red/green/blue.
RgbImage render_rgb_histogram(const IntensityHistogram& hist, int width = 640,
                              int height = 360);

}  // namespace suim
