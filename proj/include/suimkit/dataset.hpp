#pragma once

#include <string>
#include <vector>

#include "suimkit/palette.hpp"
#include "suimkit/types.hpp"

namespace suim {

// On-disk corpus layout: <root>/images/<stem>.<ext> paired with
// <root>/masks/<stem>.<ext> by stem. Extensions may differ between the
// two sides; non-image files are ignored.
struct PairEntry {
  std::string stem;
  std::string image_path;
  std::string mask_path;
};

struct CorpusManifest {
  std::string root;
  std::vector<PairEntry> pairs;            // sorted by stem
  std::vector<std::string> orphan_images;  // stems with no mask
  std::vector<std::string> orphan_masks;   // stems with no image
};

// Throws IoError when images/ or masks/ is missing, ConfigError when a
// stem appears twice on one side.
CorpusManifest scan_corpus(const std::string& root);

// Pairs files from two flat directories by stem (e.g. predictions vs
// ground truth). Only stems present in both show up, sorted; stems found
// on one side only are appended to the optional orphan lists.
struct FilePair {
  std::string stem;
  std::string a_path;
  std::string b_path;
};
std::vector<FilePair> pair_by_stem(const std::string& dir_a,
                                   const std::string& dir_b,
                                   std::vector<std::string>* only_a = nullptr,
                                   std::vector<std::string>* only_b = nullptr);

bool has_image_extension(const std::string& path);

// Sampling conventions, chosen so that identity-size resizing is exact:
// bilinear maps output i to source (i+0.5)*src/dst - 0.5 (edge clamped);
// nearest picks min(src-1, floor((i+0.5)*src/dst)).
RgbImage resize_bilinear(const RgbImage& src, int width, int height);
RgbImage resize_nearest(const RgbImage& src, int width, int height);

struct LoadedPair {
  std::string stem;
  RgbImage image;  // bilinearly resized
  LabelMap mask;   // nearest-resized, then color-decoded
};

// Reads and resizes one training pair. Mask colors are snapped with the
// given per-channel threshold.
LoadedPair load_pair(const PairEntry& entry, int width, int height,
                     int color_threshold = kDefaultColorThreshold);

// Reads a mask image and decodes it to labels at its native size.
LabelMap load_mask(const std::string& path,
                   int color_threshold = kDefaultColorThreshold);

}  // namespace suim
