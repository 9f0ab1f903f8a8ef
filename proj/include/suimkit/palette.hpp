#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "suimkit/types.hpp"

namespace suim {

// The eight object categories. The index equals the value of the 3-bit
// RGB code (bit order R,G,B), so BW=000 -> 0 ... SR=111 -> 7.
enum class Category : uint8_t {
  BW = 0,  // background / waterbody         (black)
  HD = 1,  // human divers                   (blue)
  PF = 2,  // plants / sea-grass             (green)
  WR = 3,  // wrecks / ruins                 (sky)
  RO = 4,  // robots / instruments           (red)
  RI = 5,  // reefs / invertebrates          (pink)
  FV = 6,  // fish / vertebrates             (yellow)
  SR = 7,  // sea-floor / rocks              (white)
};

inline constexpr int kNumCategories = 8;

struct PaletteEntry {
  const char* code;  // two-letter category code
  uint8_t bits;      // 3-bit code, value == class index
  Rgb color;
};

// The canonical 8-entry class <-> color table.
class Palette {
 public:
  static const std::array<PaletteEntry, kNumCategories>& entries();
  static const char* code_name(int cls);
  static int index_of(const std::string& code);  // -1 if unknown
};

inline constexpr int kDefaultColorThreshold = 127;

// Snaps an arbitrary RGB triple to the nearest 3-bit color code by
// binarizing each channel at > threshold. Total: never rejects a color.
int color_to_class(Rgb rgb, int threshold = kDefaultColorThreshold);

// Exact palette color for a class index; throws ConfigError for cls >= 8.
Rgb class_to_color(int cls);

// Pixelwise color_to_class. Throws ShapeError on an empty image.
LabelMap decode_mask(const RgbImage& rgb, int threshold = kDefaultColorThreshold);

// Pixelwise class_to_color; exact inverse of decode_mask on its output.
RgbImage encode_mask(const LabelMap& map);

enum class ClassMode { full8, major5, saliency1 };

// Maps the 8 classes onto output channels. A merge value of -1 sends the
// class to background (no channel).
struct ClassConfig {
  ClassMode mode = ClassMode::full8;
  int output_channels = kNumCategories;
  std::array<int8_t, kNumCategories> merge{};       // class -> channel or -1
  std::vector<std::string> channel_names;           // one per channel

  static ClassConfig full8();
  // The five major categories HD, WR, RO, RI, FV; PF/SR/BW are background.
  static ClassConfig major5();
  // Single channel: HD, RO, FV, WR -> 1, everything else -> 0.
  static ClassConfig saliency1();
  static ClassConfig from_mode(ClassMode mode);
  static ClassConfig from_name(const std::string& name);  // "full8" etc.
  const char* name() const;
};

// Per-class binary channel stack; channels are mutually exclusive per pixel.
std::vector<BinaryMap> to_channels(const LabelMap& map, const ClassConfig& config);

// Binary saliency mask: 1 where the class is HD, RO, FV or WR.
BinaryMap derive_saliency(const LabelMap& map);

// Collapses per-channel scores back to class labels: the best-scoring
// channel wins if it clears `cutoff` (strictly above), else background.
// A merged channel reports its first contributing class.
LabelMap soft_to_labels(const std::vector<RealMap>& channels,
                        const ClassConfig& config, double cutoff);

}  // namespace suim
