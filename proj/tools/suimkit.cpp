#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "suimkit/checkpoint.hpp"
#include "suimkit/dataset.hpp"
#include "suimkit/image_io.hpp"
#include "suimkit/metrics.hpp"
#include "suimkit/network.hpp"
#include "suimkit/palette.hpp"
#include "suimkit/plot.hpp"
#include "suimkit/stats.hpp"

namespace fs = std::filesystem;
using namespace suim;

namespace {

int thread_cap() {
  const char* env = std::getenv("SUIMKIT_THREADS");
  if (!env) return 1;
  const int v = std::atoi(env);
  return v < 1 ? 1 : v;
}

LabelMap gray_to_labels(const GrayImage& g) {
  LabelMap m(g.width, g.height);
  for (size_t i = 0; i < g.pixels.size(); ++i) {
    if (g.pixels[i] >= kNumCategories)
      throw ConfigError("label value " + std::to_string(int(g.pixels[i])) +
                        " out of range 0-7");
    m.labels[i] = g.pixels[i];
  }
  return m;
}

GrayImage labels_to_gray(const LabelMap& m) {
  GrayImage g(m.width, m.height);
  g.pixels.assign(m.labels.begin(), m.labels.end());
  return g;
}

GrayImage binary_to_gray(const BinaryMap& b) {
  GrayImage g(b.width, b.height);
  for (size_t i = 0; i < b.data.size(); ++i) g.pixels[i] = b.data[i] ? 255 : 0;
  return g;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f << text;
  if (!f) throw IoError("cannot write " + path);
}

void parse_resolution(const std::string& text, int& w, int& h) {
  const size_t x = text.find('x');
  if (x == std::string::npos || x == 0 || x + 1 >= text.size())
    throw ConfigError("resolution must look like 320x240");
  try {
    w = std::stoi(text.substr(0, x));
    h = std::stoi(text.substr(x + 1));
  } catch (...) {
    throw ConfigError("resolution must look like 320x240");
  }
  if (w < 1 || h < 1) throw ConfigError("resolution must be positive");
}

std::vector<std::string> list_images(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && has_image_extension(e.path().string()))
      out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

// Optional JSON side config: {"resolution": "WxH", "mode": "major5"}.
// Explicit flags win over file values.
struct SideConfig {
  std::string resolution;
  std::string mode;
};

SideConfig read_side_config(const std::string& path) {
  SideConfig c;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(slurp(path));
    c.resolution = j.value("resolution", "");
    c.mode = j.value("mode", "");
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config file: invalid json in " + path);
  }
  return c;
}

// ----------------------------------------------------------- subcommands

struct EncodeOpts {
  std::string labels, out = "mask.png";
};

void run_encode(const EncodeOpts& o) {
  const LabelMap m = gray_to_labels(read_gray(o.labels));
  write_image(encode_mask(m), o.out);
}

struct DecodeOpts {
  std::string mask, out = "labels.pgm";
  int threshold = kDefaultColorThreshold;
};

void run_decode(const DecodeOpts& o) {
  const LabelMap m = decode_mask(read_image(o.mask), o.threshold);
  write_gray(labels_to_gray(m), o.out);
}

struct ChannelsOpts {
  std::string mask, out_dir = ".", mode = "full8";
  int threshold = kDefaultColorThreshold;
};

void run_channels(const ChannelsOpts& o) {
  const ClassConfig config = ClassConfig::from_name(o.mode);
  const LabelMap m = decode_mask(read_image(o.mask), o.threshold);
  const std::vector<BinaryMap> chans = to_channels(m, config);
  const std::string stem = fs::path(o.mask).stem().string();
  fs::create_directories(o.out_dir);
  for (size_t i = 0; i < chans.size(); ++i) {
    const fs::path out =
        fs::path(o.out_dir) / (stem + "_" + config.channel_names[i] + ".png");
    write_gray(binary_to_gray(chans[i]), out.string());
  }
}

struct SaliencyOpts {
  std::string mask, out = "saliency.png";
  int threshold = kDefaultColorThreshold;
};

void run_saliency(const SaliencyOpts& o) {
  const LabelMap m = decode_mask(read_image(o.mask), o.threshold);
  write_gray(binary_to_gray(derive_saliency(m)), o.out);
}

struct EvalOpts_ {
  std::string pred, gt, mode = "full8", out;
  int threshold = kDefaultColorThreshold;
  bool include_absent = false;
  bool per_image = false;
};

void run_eval(const EvalOpts_& o) {
  const ClassConfig config = ClassConfig::from_name(o.mode);
  std::vector<std::string> only_pred, only_gt;
  const std::vector<FilePair> files =
      pair_by_stem(o.pred, o.gt, &only_pred, &only_gt);
  if (files.empty()) throw ConfigError("no stem-paired masks between " +
                                       o.pred + " and " + o.gt);
  std::vector<MaskPair> pairs;
  pairs.reserve(files.size());
  for (const FilePair& fp : files)
    pairs.push_back({fp.stem, load_mask(fp.a_path, o.threshold),
                     load_mask(fp.b_path, o.threshold)});

  EvalOptions opts;
  opts.include_absent = o.include_absent;
  ScoreReport report = evaluate_suite(pairs, config, opts, thread_cap());
  for (const std::string& s : only_pred)
    report.warnings.push_back("unpaired stem (pred only): " + s);
  for (const std::string& s : only_gt)
    report.warnings.push_back("unpaired stem (gt only): " + s);

  if (o.out.empty()) {
    std::cout << report_to_csv(report);
    return;
  }
  spit(o.out + ".csv", report_to_csv(report));
  spit(o.out + ".json", report_to_json(report));
  if (o.per_image) spit(o.out + "_images.csv", per_image_csv(report));
}

struct StatsOpts {
  std::string masks, images, out;
  int threshold = kDefaultColorThreshold;
  int bins = 32;
};

void run_stats(const StatsOpts& o) {
  const std::vector<std::string> mask_files = list_images(o.masks);
  if (mask_files.size() < 2)
    throw ConfigError("stats needs at least 2 masks in " + o.masks);
  std::vector<LabelMap> masks;
  masks.reserve(mask_files.size());
  for (const std::string& p : mask_files)
    masks.push_back(load_mask(p, o.threshold));

  const auto counts = occurrence_counts(masks);
  const auto corr = occurrence_correlation(masks);

  IntensityHistogram hist;
  bool have_hist = false;
  if (!o.images.empty()) {
    std::vector<RgbImage> images;
    for (const std::string& p : list_images(o.images))
      images.push_back(read_image(p));
    hist = intensity_distribution(images, o.bins);
    have_hist = true;
  }

  if (o.out.empty()) {
    std::cout << occurrence_csv(counts) << "\n" << correlation_csv(corr);
    if (have_hist) std::cout << "\n" << intensity_csv(hist);
    return;
  }
  spit(o.out + "_occurrence.csv", occurrence_csv(counts));
  spit(o.out + "_correlation.csv", correlation_csv(corr));

  std::vector<double> values(counts.begin(), counts.end());
  std::vector<Rgb> colors;
  for (const PaletteEntry& e : Palette::entries()) colors.push_back(e.color);
  write_image(render_bar_chart(values, colors), o.out + "_occurrence.png");

  std::vector<double> flat;
  for (const auto& row : corr) flat.insert(flat.end(), row.begin(), row.end());
  write_image(render_heatmap(flat, kNumCategories), o.out + "_correlation.png");

  if (have_hist) {
    spit(o.out + "_intensity.csv", intensity_csv(hist));
    write_image(render_rgb_histogram(hist), o.out + "_intensity.png");
  }
}

struct TrainOpts {
  std::string data, variant = "rsb", spec_file, mode = "major5", resolution,
              out = "model", config_file;
  int epochs = 1, batch = 8;
  double lr = 1e-4, beta1 = 0.5, val_split = 0.0;
  uint64_t seed = 1;
  int threshold = kDefaultColorThreshold;
  bool variant_given = false, resolution_given = false, mode_given = false;
  // augmentation
  bool augment = false;
  AugmentParams aug;
  bool radians = false;
};

void run_train(const TrainOpts& o) {
  std::string mode = o.mode, resolution = o.resolution;
  if (!o.config_file.empty()) {
    const SideConfig side = read_side_config(o.config_file);
    if (!o.mode_given && !side.mode.empty()) mode = side.mode;
    if (!o.resolution_given && !side.resolution.empty())
      resolution = side.resolution;
  }
  const ClassConfig config = ClassConfig::from_name(mode);

  nn::NetworkSpec spec = o.spec_file.empty()
                             ? nn::reference_spec(o.variant)
                             : nn::NetworkSpec::from_json(slurp(o.spec_file));
  if (!resolution.empty()) parse_resolution(resolution, spec.width, spec.height);
  spec.out_channels = config.output_channels;
  spec.seed = o.seed;

  const CorpusManifest manifest = scan_corpus(o.data);
  if (manifest.pairs.empty())
    throw ConfigError("no image/mask pairs under " + o.data);
  std::vector<nn::TrainSample> samples;
  samples.reserve(manifest.pairs.size());
  for (const PairEntry& e : manifest.pairs) {
    LoadedPair p = load_pair(e, spec.width, spec.height, o.threshold);
    samples.push_back({std::move(p.image), std::move(p.mask), p.stem});
  }

  nn::Network net = nn::build_network(spec);

  nn::FitOptions fo;
  fo.epochs = o.epochs;
  fo.batch_size = o.batch;
  fo.val_fraction = o.val_split;
  fo.augment = o.augment;
  fo.aug = o.aug;
  fo.aug.unit = o.radians ? AngleUnit::Radians : AngleUnit::Degrees;
  fo.aug.seed = o.seed + 1;  // distinct stream from the shuffle
  fo.shuffle_seed = o.seed;
  fo.adam.lr = o.lr;
  fo.adam.beta1 = o.beta1;
  const nn::FitHistory hist = nn::fit(net, samples, config, fo);

  save_checkpoint(o.out + ".ckpt", net);
  std::ostringstream csv;
  csv << "epoch,train_loss";
  if (!hist.val_loss.empty()) csv << ",val_loss";
  csv << "\n";
  for (size_t e = 0; e < hist.train_loss.size(); ++e) {
    csv << e << "," << fmt(hist.train_loss[e]);
    if (!hist.val_loss.empty()) csv << "," << fmt(hist.val_loss[e]);
    csv << "\n";
  }
  spit(o.out + "_history.csv", csv.str());

  std::cout << "pairs=" << samples.size() << " epochs=" << o.epochs
            << " params=" << net.param_count();
  if (!hist.train_loss.empty())
    std::cout << " final_loss=" << fmt(hist.train_loss.back());
  std::cout << "\n";
}

struct InferOpts {
  std::string checkpoint, out_dir = ".", mode = "major5", config_file;
  std::vector<std::string> images;
  std::string images_dir;
  double cutoff = kDefaultCutoff;
  bool mode_given = false;
};

void run_infer(const InferOpts& o) {
  std::string mode = o.mode;
  if (!o.config_file.empty()) {
    const SideConfig side = read_side_config(o.config_file);
    if (!o.mode_given && !side.mode.empty()) mode = side.mode;
  }
  const ClassConfig config = ClassConfig::from_name(mode);

  nn::Network net = nn::load_checkpoint(o.checkpoint);
  if (net.spec.out_channels != config.output_channels)
    throw ConfigError("checkpoint outputs " +
                      std::to_string(net.spec.out_channels) +
                      " channels but mode " + mode + " needs " +
                      std::to_string(config.output_channels));

  std::vector<std::string> inputs = o.images;
  if (!o.images_dir.empty()) {
    const std::vector<std::string> more = list_images(o.images_dir);
    inputs.insert(inputs.end(), more.begin(), more.end());
  }
  if (inputs.empty()) throw ConfigError("no input images given");

  fs::create_directories(o.out_dir);
  for (const std::string& path : inputs) {
    const RgbImage img =
        resize_bilinear(read_image(path), net.spec.width, net.spec.height);
    const Tensor probs =
        net.forward(nn::image_to_tensor(img), nn::RunMode::Infer);
    const std::vector<RealMap> maps = nn::tensor_to_realmaps(probs, 0);
    const std::string stem = fs::path(path).stem().string();
    for (size_t i = 0; i < maps.size(); ++i) {
      const fs::path out = fs::path(o.out_dir) /
                           (stem + "_" + config.channel_names[i] + ".png");
      write_gray(binary_to_gray(threshold_soft(maps[i], o.cutoff)),
                 out.string());
    }
    if (config.mode != ClassMode::saliency1) {
      const LabelMap lbl = soft_to_labels(maps, config, o.cutoff);
      const fs::path out = fs::path(o.out_dir) / (stem + "_mask.png");
      write_image(encode_mask(lbl), out.string());
    }
  }
}

struct BenchOpts {
  std::string variant = "rsb", resolution;
  int frames = 3;
  uint64_t seed = 1;
};

void run_bench(const BenchOpts& o) {
  nn::NetworkSpec spec = nn::reference_spec(o.variant);
  if (!o.resolution.empty())
    parse_resolution(o.resolution, spec.width, spec.height);
  spec.seed = o.seed;
  nn::Network net = nn::build_network(spec);

  std::mt19937_64 rng(o.seed);
  const Tensor x =
      Tensor::randn(1, spec.in_channels, spec.height, spec.width, 0.25, rng);
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < o.frames; ++i) net.forward(x, nn::RunMode::Infer);
  const auto t1 = std::chrono::steady_clock::now();
  const double secs = std::chrono::duration<double>(t1 - t0).count();
  std::cout << o.variant << " " << spec.width << "x" << spec.height << ": "
            << std::fixed << std::setprecision(2)
            << (secs > 0 ? o.frames / secs : 0.0) << " fps (" << o.frames
            << " frames, params=" << net.param_count() << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"segmentation toolkit for underwater imagery"};
  app.require_subcommand(1);

  EncodeOpts enc;
  auto* c_enc = app.add_subcommand(
      "encode", "label raster (pgm/png, values 0-7) -> color mask");
  c_enc->add_option("--labels", enc.labels, "input label raster")->required();
  c_enc->add_option("--out", enc.out, "output color mask path");
  c_enc->callback([&] { run_encode(enc); });

  DecodeOpts dec;
  auto* c_dec =
      app.add_subcommand("decode", "color mask -> label raster (values 0-7)");
  c_dec->add_option("--mask", dec.mask, "input color mask")->required();
  c_dec->add_option("--out", dec.out, "output label raster path");
  c_dec->add_option("--threshold", dec.threshold, "channel binarization cut")
      ->check(CLI::Range(1, 254));
  c_dec->callback([&] { run_decode(dec); });

  ChannelsOpts chn;
  auto* c_chn = app.add_subcommand(
      "channels", "color mask -> one binary image per class channel");
  c_chn->add_option("--mask", chn.mask, "input color mask")->required();
  c_chn->add_option("--out-dir", chn.out_dir, "output directory");
  c_chn->add_option("--mode", chn.mode, "full8|major5|saliency1");
  c_chn->add_option("--threshold", chn.threshold, "channel binarization cut")
      ->check(CLI::Range(1, 254));
  c_chn->callback([&] { run_channels(chn); });

  SaliencyOpts sal;
  auto* c_sal =
      app.add_subcommand("saliency", "color mask -> binary saliency image");
  c_sal->add_option("--mask", sal.mask, "input color mask")->required();
  c_sal->add_option("--out", sal.out, "output image path");
  c_sal->add_option("--threshold", sal.threshold, "channel binarization cut")
      ->check(CLI::Range(1, 254));
  c_sal->callback([&] { run_saliency(sal); });

  EvalOpts_ evl;
  auto* c_evl = app.add_subcommand(
      "eval", "score predicted masks against ground truth by stem");
  c_evl->add_option("--pred", evl.pred, "predicted mask directory")->required();
  c_evl->add_option("--gt", evl.gt, "ground-truth mask directory")->required();
  c_evl->add_option("--mode", evl.mode, "full8|major5|saliency1");
  c_evl->add_option("--threshold", evl.threshold, "channel binarization cut")
      ->check(CLI::Range(1, 254));
  c_evl->add_flag("--include-absent", evl.include_absent,
                  "score categories even when absent from both masks");
  c_evl->add_flag("--per-image", evl.per_image, "also write per-image rows");
  c_evl->add_option("--out", evl.out,
                    "output base path (writes .csv and .json)");
  c_evl->callback([&] { run_eval(evl); });

  StatsOpts sts;
  auto* c_sts = app.add_subcommand(
      "stats", "corpus statistics: occurrences, correlations, intensities");
  c_sts->add_option("--masks", sts.masks, "mask directory")->required();
  c_sts->add_option("--images", sts.images, "image directory (intensity)");
  c_sts->add_option("--bins", sts.bins, "intensity histogram bins")
      ->check(CLI::Range(1, 256));
  c_sts->add_option("--threshold", sts.threshold, "channel binarization cut")
      ->check(CLI::Range(1, 254));
  c_sts->add_option("--out", sts.out, "output base path (csv + png charts)");
  c_sts->callback([&] { run_stats(sts); });

  TrainOpts trn;
  auto* c_trn = app.add_subcommand("train", "train a model on a paired corpus");
  c_trn->add_option("--data", trn.data, "corpus root (images/ + masks/)")
      ->required();
  auto* trn_variant =
      c_trn->add_option("--variant", trn.variant, "rsb|vgg");
  c_trn->add_option("--spec", trn.spec_file, "network spec json (overrides --variant)")
      ->excludes(trn_variant);
  auto* trn_mode = c_trn->add_option("--mode", trn.mode, "full8|major5|saliency1");
  auto* trn_res =
      c_trn->add_option("--resolution", trn.resolution, "training size WxH");
  c_trn->add_option("--config", trn.config_file,
                    "json side config (resolution, mode)");
  c_trn->add_option("--epochs", trn.epochs, "training epochs")
      ->check(CLI::Range(0, 1000000));
  c_trn->add_option("--batch", trn.batch, "mini-batch size")
      ->check(CLI::Range(1, 4096));
  c_trn->add_option("--lr", trn.lr, "Adam learning rate");
  c_trn->add_option("--beta1", trn.beta1, "Adam first-moment decay");
  c_trn->add_option("--val-split", trn.val_split,
                    "trailing fraction held out for validation");
  c_trn->add_option("--seed", trn.seed, "master seed (init, shuffle, augment)");
  c_trn->add_option("--threshold", trn.threshold, "mask binarization cut")
      ->check(CLI::Range(1, 254));
  c_trn->add_option("--out", trn.out, "output base (writes .ckpt, _history.csv)");
  c_trn->add_flag("--augment", trn.augment, "enable affine augmentation");
  c_trn->add_option("--rotation", trn.aug.rotation_range, "rotation range");
  c_trn->add_option("--width-shift", trn.aug.width_shift,
                    "width shift range (fraction)");
  c_trn->add_option("--height-shift", trn.aug.height_shift,
                    "height shift range (fraction)");
  c_trn->add_option("--shear", trn.aug.shear_range, "shear range");
  c_trn->add_option("--zoom", trn.aug.zoom_range, "zoom range");
  c_trn->add_flag("!--no-hflip", trn.aug.horizontal_flip,
                  "disable horizontal flips");
  c_trn->add_flag("--radians", trn.radians,
                  "treat rotation/shear ranges as radians");
  c_trn->callback([&] {
    trn.variant_given = trn_variant->count() > 0;
    trn.resolution_given = trn_res->count() > 0;
    trn.mode_given = trn_mode->count() > 0;
    run_train(trn);
  });

  InferOpts inf;
  auto* c_inf =
      app.add_subcommand("infer", "run a checkpoint over images");
  c_inf->add_option("--checkpoint", inf.checkpoint, "checkpoint path")
      ->required();
  c_inf->add_option("--image", inf.images, "input image (repeatable)");
  c_inf->add_option("--images", inf.images_dir, "input image directory");
  auto* inf_mode = c_inf->add_option("--mode", inf.mode, "full8|major5|saliency1");
  c_inf->add_option("--cutoff", inf.cutoff, "channel threshold")
      ->check(CLI::Range(0.0, 1.0));
  c_inf->add_option("--config", inf.config_file, "json side config (mode)");
  c_inf->add_option("--out-dir", inf.out_dir, "output directory");
  c_inf->callback([&] {
    inf.mode_given = inf_mode->count() > 0;
    run_infer(inf);
  });

  BenchOpts bch;
  auto* c_bch = app.add_subcommand(
      "bench", "report local forward-pass throughput (informational)");
  c_bch->add_option("--variant", bch.variant, "rsb|vgg");
  c_bch->add_option("--resolution", bch.resolution, "input size WxH");
  c_bch->add_option("--frames", bch.frames, "frames to time")
      ->check(CLI::Range(1, 1000));
  c_bch->add_option("--seed", bch.seed, "input/init seed");
  c_bch->callback([&] { run_bench(bch); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
