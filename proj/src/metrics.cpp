#include "suimkit/metrics.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace suim {

ConfusionCounts confusion(const BinaryMap& pred, const BinaryMap& gt) {
  if (pred.width != gt.width || pred.height != gt.height)
    throw ShapeError("confusion: dimension mismatch");
  ConfusionCounts c;
  for (size_t i = 0; i < pred.size(); ++i) {
    bool p = pred.data[i] != 0;
    bool g = gt.data[i] != 0;
    if (p && g) ++c.tp;
    else if (p && !g) ++c.fp;
    else if (!p && g) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double f_score(const ConfusionCounts& c) {
  if (c.tp == 0) {
    if (c.fp == 0 && c.fn == 0) return 1.0;  // both masks empty
    return 0.0;
  }
  return 2.0 * double(c.tp) / double(2 * c.tp + c.fp + c.fn);
}

double iou(const ConfusionCounts& c) {
  if (c.tp == 0) {
    if (c.fp == 0 && c.fn == 0) return 1.0;
    return 0.0;
  }
  return double(c.tp) / double(c.tp + c.fp + c.fn);
}

BinaryMap threshold_soft(const RealMap& soft, double t) {
  BinaryMap out(soft.width, soft.height);
  for (size_t i = 0; i < soft.size(); ++i)
    out.data[i] = soft.data[i] > t ? 1 : 0;
  return out;
}

namespace {

PairRow score_channels(const std::vector<BinaryMap>& pred_ch,
                       const std::vector<BinaryMap>& gt_ch,
                       const EvalOptions& opts) {
  PairRow row;
  double sum_f = 0.0, sum_iou = 0.0;
  for (size_t ch = 0; ch < gt_ch.size(); ++ch) {
    ConfusionCounts c = confusion(pred_ch[ch], gt_ch[ch]);
    CategoryResult r;
    r.f = f_score(c);
    r.iou = iou(c);
    r.present = (c.tp + c.fp + c.fn) > 0;
    if (opts.include_absent || r.present) {
      sum_f += r.f;
      sum_iou += r.iou;
      ++row.combined_n;
    }
    row.per_category.push_back(r);
  }
  if (row.combined_n > 0) {
    row.combined_f = sum_f / row.combined_n;
    row.combined_iou = sum_iou / row.combined_n;
  }
  return row;
}

}  // namespace

PairRow evaluate_pair(const LabelMap& pred, const LabelMap& gt,
                      const ClassConfig& config, const EvalOptions& opts) {
  if (pred.width != gt.width || pred.height != gt.height)
    throw ShapeError("evaluate_pair: dimension mismatch");
  return score_channels(to_channels(pred, config), to_channels(gt, config), opts);
}

PairRow evaluate_pair(const std::vector<RealMap>& soft_pred, const LabelMap& gt,
                      const ClassConfig& config, double cutoff,
                      const EvalOptions& opts) {
  if (int(soft_pred.size()) != config.output_channels)
    throw ShapeError("evaluate_pair: channel-count mismatch");
  std::vector<BinaryMap> pred_ch;
  pred_ch.reserve(soft_pred.size());
  for (const RealMap& m : soft_pred) {
    if (m.width != gt.width || m.height != gt.height)
      throw ShapeError("evaluate_pair: dimension mismatch");
    pred_ch.push_back(threshold_soft(m, cutoff));
  }
  return score_channels(pred_ch, to_channels(gt, config), opts);
}

namespace {

ScoreStats stats_of(const std::vector<double>& f, const std::vector<double>& i) {
  ScoreStats s;
  s.n = f.size();
  if (s.n == 0) {
    s.f_mean = s.f_spread = s.iou_mean = s.iou_spread =
        std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double sf = 0, si = 0;
  for (size_t k = 0; k < s.n; ++k) {
    sf += f[k];
    si += i[k];
  }
  s.f_mean = sf / s.n;
  s.iou_mean = si / s.n;
  double vf = 0, vi = 0;
  for (size_t k = 0; k < s.n; ++k) {
    vf += (f[k] - s.f_mean) * (f[k] - s.f_mean);
    vi += (i[k] - s.iou_mean) * (i[k] - s.iou_mean);
  }
  // Population variance (divide by n), reported as mean +- sqrt(variance).
  s.f_spread = std::sqrt(vf / s.n);
  s.iou_spread = std::sqrt(vi / s.n);
  return s;
}

}  // namespace

ScoreReport evaluate_suite(const std::vector<MaskPair>& pairs,
                           const ClassConfig& config, const EvalOptions& opts,
                           int threads) {
  if (pairs.empty()) throw ConfigError("evaluate_suite: no mask pairs");

  ScoreReport report;
  report.categories = config.channel_names;
  report.n_images = pairs.size();
  report.per_image.resize(pairs.size());

  // Rows are independent; aggregation below stays sequential so results
  // match a single-threaded run exactly.
  int nthreads = std::max(1, std::min<int>(threads, int(pairs.size())));
  if (nthreads == 1) {
    for (size_t i = 0; i < pairs.size(); ++i) {
      report.per_image[i] = evaluate_pair(pairs[i].pred, pairs[i].gt, config, opts);
      report.per_image[i].stem = pairs[i].stem;
    }
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int t = 0; t < nthreads; ++t) {
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < pairs.size(); i = next.fetch_add(1)) {
          report.per_image[i] = evaluate_pair(pairs[i].pred, pairs[i].gt, config, opts);
          report.per_image[i].stem = pairs[i].stem;
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  for (int ch = 0; ch < config.output_channels; ++ch) {
    std::vector<double> fs, is;
    for (const PairRow& row : report.per_image) {
      const CategoryResult& r = row.per_category[ch];
      if (opts.include_absent || r.present) {
        fs.push_back(r.f);
        is.push_back(r.iou);
      }
    }
    report.per_category.push_back(stats_of(fs, is));
  }

  std::vector<double> cf, ci;
  for (const PairRow& row : report.per_image) {
    if (row.combined_n > 0) {
      cf.push_back(row.combined_f);
      ci.push_back(row.combined_iou);
    }
  }
  report.combined = stats_of(cf, ci);
  return report;
}

std::string report_to_csv(const ScoreReport& report) {
  std::ostringstream os;
  os.precision(12);
  os << "category,f_mean,f_spread,iou_mean,iou_spread,n\n";
  for (size_t ch = 0; ch < report.categories.size(); ++ch) {
    const ScoreStats& s = report.per_category[ch];
    os << report.categories[ch] << ',' << s.f_mean << ',' << s.f_spread << ','
       << s.iou_mean << ',' << s.iou_spread << ',' << s.n << '\n';
  }
  const ScoreStats& c = report.combined;
  os << "combined," << c.f_mean << ',' << c.f_spread << ',' << c.iou_mean << ','
     << c.iou_spread << ',' << c.n << '\n';
  return os.str();
}

namespace {

nlohmann::json stats_json(const ScoreStats& s) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isnan(v)) return nullptr;
    return v;
  };
  return {{"f_mean", num(s.f_mean)},
          {"f_spread", num(s.f_spread)},
          {"iou_mean", num(s.iou_mean)},
          {"iou_spread", num(s.iou_spread)},
          {"n", s.n}};
}

}  // namespace

std::string report_to_json(const ScoreReport& report) {
  nlohmann::json j;
  j["n_images"] = report.n_images;
  for (size_t ch = 0; ch < report.categories.size(); ++ch)
    j["per_category"][report.categories[ch]] = stats_json(report.per_category[ch]);
  j["combined"] = stats_json(report.combined);
  j["warnings"] = report.warnings;
  return j.dump(2) + "\n";
}

std::string per_image_csv(const ScoreReport& report) {
  std::ostringstream os;
  os.precision(12);
  os << "stem";
  for (const std::string& c : report.categories)
    os << ',' << c << "_f," << c << "_iou," << c << "_present";
  os << ",combined_f,combined_iou,combined_n\n";
  for (const PairRow& row : report.per_image) {
    os << row.stem;
    for (const CategoryResult& r : row.per_category)
      os << ',' << r.f << ',' << r.iou << ',' << (r.present ? 1 : 0);
    os << ',' << row.combined_f << ',' << row.combined_iou << ',' << row.combined_n
       << '\n';
  }
  return os.str();
}

}  // namespace suim
