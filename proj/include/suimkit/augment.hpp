#pragma once

#include <cstdint>
#include <random>
#include <utility>

#include "suimkit/types.hpp"

namespace suim {

enum class AngleUnit { Degrees, Radians };

// Sampling ranges for paired image/mask augmentation. Defaults are the
// training-time values: rotation 0.2, shift/shear/zoom 0.05, hflip on.
struct AugmentParams {
  double rotation_range = 0.2;   // +- bound, in `unit`
  double width_shift = 0.05;     // fraction of width
  double height_shift = 0.05;    // fraction of height
  double shear_range = 0.05;     // +- bound, in `unit`
  double zoom_range = 0.05;      // zoom sampled from [1-z, 1+z]
  bool horizontal_flip = true;
  AngleUnit unit = AngleUnit::Degrees;
  uint64_t seed = 0;
};

// One sampled affine transform. Components are stored as sampled (angles
// in `unit`, shifts as fractions, zooms multiplicative).
struct AffineTransform {
  double rotation = 0.0;
  double shift_x = 0.0;
  double shift_y = 0.0;
  double shear = 0.0;
  double zoom_x = 1.0;
  double zoom_y = 1.0;
  bool flip = false;
  AngleUnit unit = AngleUnit::Degrees;

  static AffineTransform identity() { return {}; }
  bool is_identity() const {
    return rotation == 0.0 && shift_x == 0.0 && shift_y == 0.0 && shear == 0.0 &&
           zoom_x == 1.0 && zoom_y == 1.0 && !flip;
  }
};

// Each component uniform in [-range, +range] (zoom in [1-range, 1+range]);
// flip Bernoulli(0.5) when enabled. Deterministic for a given rng state.
AffineTransform sample_transform(const AugmentParams& params, std::mt19937_64& rng);

// Maps an output pixel to its source location: mirror for flip, then the
// inverse rotation/shear/zoom about the image center plus translation.
// Exposed so oracle-style tests can remap coordinates directly.
void source_coords(const AffineTransform& t, int width, int height, double out_x,
                   double out_y, double& src_x, double& src_y);

// Applies the same geometry to both: image resampled bilinearly with edge
// replication, mask nearest-neighbor with background fill. The output mask
// only ever contains class indices that exist in the input value range.
std::pair<RgbImage, LabelMap> apply_pair(const RgbImage& image,
                                         const LabelMap& mask,
                                         const AffineTransform& t);

}  // namespace suim
