#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "suimkit/palette.hpp"
#include "suimkit/types.hpp"

namespace suim {

struct ConfusionCounts {
  uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  uint64_t total() const { return tp + fp + fn + tn; }
};

ConfusionCounts confusion(const BinaryMap& pred, const BinaryMap& gt);

// Dice coefficient F = 2PR/(P+R) = 2tp/(2tp+fp+fn). Degenerate cases:
// both masks empty -> 1, exactly one empty -> 0.
double f_score(const ConfusionCounts& c);

// IOU = tp/(tp+fp+fn), same degenerate convention as f_score.
double iou(const ConfusionCounts& c);

// Pixel = 1 iff value > t (strict).
BinaryMap threshold_soft(const RealMap& soft, double t);

inline constexpr double kDefaultCutoff = 0.5;

struct CategoryResult {
  double f = 0.0;
  double iou = 0.0;
  bool present = false;  // category appears in gt or pred for this image
};

// One evaluated image pair: per-category scores plus the per-image
// combined score (mean over the categories counted for this image).
struct PairRow {
  std::string stem;
  std::vector<CategoryResult> per_category;  // config channel order
  double combined_f = 0.0;
  double combined_iou = 0.0;
  int combined_n = 0;  // categories averaged into the combined score
};

// If false (default), a category contributes to the per-category and
// combined means only when it appears in gt or pred for that image.
struct EvalOptions {
  bool include_absent = false;
};

PairRow evaluate_pair(const LabelMap& pred, const LabelMap& gt,
                      const ClassConfig& config, const EvalOptions& opts = {});

// Soft prediction stack: one real channel per config channel, each
// thresholded at `cutoff` before comparison.
PairRow evaluate_pair(const std::vector<RealMap>& soft_pred, const LabelMap& gt,
                      const ClassConfig& config, double cutoff = kDefaultCutoff,
                      const EvalOptions& opts = {});

struct ScoreStats {
  double f_mean = 0.0, f_spread = 0.0;      // spread = sqrt(population variance)
  double iou_mean = 0.0, iou_spread = 0.0;
  size_t n = 0;  // images aggregated
};

struct ScoreReport {
  std::vector<std::string> categories;  // config channel order
  std::vector<ScoreStats> per_category;
  ScoreStats combined;
  size_t n_images = 0;
  std::vector<PairRow> per_image;
  std::vector<std::string> warnings;  // e.g. unpaired stems
};

struct MaskPair {
  std::string stem;
  LabelMap pred;
  LabelMap gt;
};

// Aggregates per-image rows into mean +- sqrt(population variance), per
// category and combined. Throws ConfigError when `pairs` is empty.
ScoreReport evaluate_suite(const std::vector<MaskPair>& pairs,
                           const ClassConfig& config, const EvalOptions& opts = {},
                           int threads = 1);

std::string report_to_csv(const ScoreReport& report);
std::string report_to_json(const ScoreReport& report);
std::string per_image_csv(const ScoreReport& report);

}  // namespace suim
