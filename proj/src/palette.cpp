#include "suimkit/palette.hpp"

#include <stdexcept>

namespace suim {

namespace {

// Bit order is R,G,B: bit 2 -> R, bit 1 -> G, bit 0 -> B.
constexpr std::array<PaletteEntry, kNumCategories> kEntries = {{
    {"BW", 0b000, {0, 0, 0}},
    {"HD", 0b001, {0, 0, 255}},
    {"PF", 0b010, {0, 255, 0}},
    {"WR", 0b011, {0, 255, 255}},
    {"RO", 0b100, {255, 0, 0}},
    {"RI", 0b101, {255, 0, 255}},
    {"FV", 0b110, {255, 255, 0}},
    {"SR", 0b111, {255, 255, 255}},
}};

}  // namespace

const std::array<PaletteEntry, kNumCategories>& Palette::entries() {
  return kEntries;
}

const char* Palette::code_name(int cls) {
  if (cls < 0 || cls >= kNumCategories)
    throw ConfigError("invalid class index " + std::to_string(cls));
  return kEntries[cls].code;
}

int Palette::index_of(const std::string& code) {
  for (int i = 0; i < kNumCategories; ++i)
    if (code == kEntries[i].code) return i;
  return -1;
}

int color_to_class(Rgb rgb, int threshold) {
  int cls = 0;
  if (rgb.r > threshold) cls |= 0b100;
  if (rgb.g > threshold) cls |= 0b010;
  if (rgb.b > threshold) cls |= 0b001;
  return cls;
}

Rgb class_to_color(int cls) {
  if (cls < 0 || cls >= kNumCategories)
    throw ConfigError("invalid class index " + std::to_string(cls));
  return kEntries[cls].color;
}

LabelMap decode_mask(const RgbImage& rgb, int threshold) {
  if (rgb.empty()) throw ShapeError("decode_mask: empty image");
  LabelMap map(rgb.width, rgb.height);
  const uint8_t* p = rgb.pixels.data();
  for (size_t i = 0; i < map.size(); ++i, p += 3)
    map.labels[i] = uint8_t(color_to_class({p[0], p[1], p[2]}, threshold));
  return map;
}

RgbImage encode_mask(const LabelMap& map) {
  RgbImage img(map.width, map.height);
  uint8_t* p = img.pixels.data();
  for (size_t i = 0; i < map.size(); ++i, p += 3) {
    Rgb c = kEntries[map.labels[i]].color;
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }
  return img;
}

ClassConfig ClassConfig::full8() {
  ClassConfig cfg;
  cfg.mode = ClassMode::full8;
  cfg.output_channels = kNumCategories;
  for (int i = 0; i < kNumCategories; ++i) {
    cfg.merge[i] = int8_t(i);
    cfg.channel_names.push_back(kEntries[i].code);
  }
  return cfg;
}

ClassConfig ClassConfig::major5() {
  ClassConfig cfg;
  cfg.mode = ClassMode::major5;
  cfg.output_channels = 5;
  cfg.merge.fill(-1);
  // Channel order follows the reporting convention HD, WR, RO, RI, FV.
  const Category order[5] = {Category::HD, Category::WR, Category::RO,
                             Category::RI, Category::FV};
  for (int ch = 0; ch < 5; ++ch) {
    cfg.merge[int(order[ch])] = int8_t(ch);
    cfg.channel_names.push_back(kEntries[int(order[ch])].code);
  }
  return cfg;
}

ClassConfig ClassConfig::saliency1() {
  ClassConfig cfg;
  cfg.mode = ClassMode::saliency1;
  cfg.output_channels = 1;
  cfg.merge.fill(-1);
  for (Category c : {Category::HD, Category::RO, Category::FV, Category::WR})
    cfg.merge[int(c)] = 0;
  cfg.channel_names.push_back("SAL");
  return cfg;
}

ClassConfig ClassConfig::from_mode(ClassMode mode) {
  switch (mode) {
    case ClassMode::full8: return full8();
    case ClassMode::major5: return major5();
    case ClassMode::saliency1: return saliency1();
  }
  throw ConfigError("unknown class mode");
}

ClassConfig ClassConfig::from_name(const std::string& name) {
  if (name == "full8") return full8();
  if (name == "major5") return major5();
  if (name == "saliency1") return saliency1();
  throw ConfigError("unknown class mode '" + name + "'");
}

const char* ClassConfig::name() const {
  switch (mode) {
    case ClassMode::full8: return "full8";
    case ClassMode::major5: return "major5";
    case ClassMode::saliency1: return "saliency1";
  }
  return "?";
}

std::vector<BinaryMap> to_channels(const LabelMap& map, const ClassConfig& config) {
  std::vector<BinaryMap> channels(config.output_channels,
                                  BinaryMap(map.width, map.height));
  for (size_t i = 0; i < map.size(); ++i) {
    int ch = config.merge[map.labels[i]];
    if (ch >= 0) channels[ch].data[i] = 1;
  }
  return channels;
}

BinaryMap derive_saliency(const LabelMap& map) {
  BinaryMap out(map.width, map.height);
  for (size_t i = 0; i < map.size(); ++i) {
    uint8_t c = map.labels[i];
    out.data[i] = (c == uint8_t(Category::HD) || c == uint8_t(Category::RO) ||
                   c == uint8_t(Category::FV) || c == uint8_t(Category::WR))
                      ? 1
                      : 0;
  }
  return out;
}

LabelMap soft_to_labels(const std::vector<RealMap>& channels,
                        const ClassConfig& config, double cutoff) {
  if (int(channels.size()) != config.output_channels)
    throw ShapeError("soft_to_labels: channel count mismatch");
  if (channels.empty()) throw ShapeError("soft_to_labels: no channels");
  const int w = channels[0].width, h = channels[0].height;
  for (const RealMap& m : channels)
    if (m.width != w || m.height != h)
      throw ShapeError("soft_to_labels: channel dimension mismatch");

  // First class feeding each channel, used as its reported label.
  std::vector<uint8_t> rep(channels.size(), 0);
  for (int ch = 0; ch < config.output_channels; ++ch)
    for (int cls = 0; cls < kNumCategories; ++cls)
      if (config.merge[cls] == ch) {
        rep[ch] = uint8_t(cls);
        break;
      }

  LabelMap out(w, h);
  for (size_t i = 0; i < out.size(); ++i) {
    int best = 0;
    double best_v = channels[0].data[i];
    for (int ch = 1; ch < int(channels.size()); ++ch)
      if (channels[ch].data[i] > best_v) {
        best_v = channels[ch].data[i];
        best = ch;
      }
    out.labels[i] = best_v > cutoff ? rep[best] : 0;
  }
  return out;
}

}  // namespace suim
