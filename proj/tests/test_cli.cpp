#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "suimkit/dataset.hpp"
#include "suimkit/image_io.hpp"
#include "suimkit/network.hpp"
#include "suimkit/palette.hpp"
#include "suimkit/stats.hpp"

using namespace suim;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

struct TempTree {
  fs::path root;
  explicit TempTree(const std::string& tag) {
    root = fs::temp_directory_path() / ("suimkit_cli_" + tag);
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~TempTree() { fs::remove_all(root); }
};

RunResult run_cli(const TempTree& t, const std::string& args) {
  const fs::path so = t.root / "_stdout.txt";
  const fs::path se = t.root / "_stderr.txt";
  const std::string cmd = std::string(SUIMKIT_CLI_PATH) + " " + args + " > " +
                          so.string() + " 2> " + se.string();
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(so);
  r.err = slurp(se);
  return r;
}

LabelMap random_mask(std::mt19937_64& rng, int w, int h, int max_cls = 7) {
  std::uniform_int_distribution<int> cls(0, max_cls);
  LabelMap m(w, h);
  for (auto& v : m.labels) v = uint8_t(cls(rng));
  return m;
}

RgbImage random_image(std::mt19937_64& rng, int w, int h) {
  std::uniform_int_distribution<int> px(0, 255);
  RgbImage img(w, h);
  for (auto& v : img.pixels) v = uint8_t(px(rng));
  return img;
}

GrayImage labels_as_gray(const LabelMap& m) {
  GrayImage g(m.width, m.height);
  std::copy(m.labels.begin(), m.labels.end(), g.pixels.begin());
  return g;
}

// Small training corpus plus a narrow network config; returns its path.
fs::path make_train_fixture(const TempTree& t, int n_pairs, int side) {
  fs::create_directories(t.root / "data/images");
  fs::create_directories(t.root / "data/masks");
  std::mt19937_64 rng(77);
  for (int i = 0; i < n_pairs; ++i) {
    const std::string stem = "p" + std::to_string(i);
    const LabelMap mask = random_mask(rng, side, side);
    write_image(random_image(rng, side, side),
                (t.root / "data/images" / (stem + ".png")).string());
    write_image(encode_mask(mask),
                (t.root / "data/masks" / (stem + ".png")).string());
  }
  nn::NetworkSpec s;
  s.variant = "rsb";
  s.width = side;
  s.height = side;
  s.rsb.stem_filters = 8;
  s.rsb.stage_filters = {16, 32};
  s.rsb.stage_blocks = {3, 4};
  s.rsb.decoder_filters = {32, 24, 16};
  s.rsb.up_filters = {24, 16, 8};
  const fs::path spec_path = t.root / "small_spec.json";
  std::ofstream(spec_path) << s.to_json();
  return spec_path;
}

}  // namespace

TEST_CASE("usage errors exit with 2, domain errors with 1") {
  TempTree t("codes");
  CHECK(run_cli(t, "").code == 2);
  CHECK(run_cli(t, "frobnicate").code == 2);
  CHECK(run_cli(t, "decode").code == 2);                     // missing --mask
  CHECK(run_cli(t, "decode --mask x.png --bogus").code == 2);
  CHECK(run_cli(t, "decode --mask x.png --threshold 300").code == 2);
  CHECK(run_cli(t, "--help").code == 0);
  CHECK(run_cli(t, "encode --help").code == 0);

  const RunResult r = run_cli(t, "decode --mask " + (t.root / "nope.png").string());
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error: ", 0) == 0);
  CHECK(r.err.find('\n') == r.err.size() - 1);  // single line
}

TEST_CASE("encode and decode round trip through label rasters") {
  TempTree t("codec");
  std::mt19937_64 rng(1);
  const LabelMap mask = random_mask(rng, 12, 9);
  const fs::path labels = t.root / "labels.pgm";
  write_gray(labels_as_gray(mask), labels.string());

  const fs::path color = t.root / "mask.png";
  CHECK(run_cli(t, "encode --labels " + labels.string() + " --out " +
                       color.string())
            .code == 0);
  const fs::path back = t.root / "back.pgm";
  CHECK(run_cli(t, "decode --mask " + color.string() + " --out " +
                       back.string())
            .code == 0);
  CHECK(slurp(back) == slurp(labels));

  // Color PPM decoded and re-encoded must reproduce identical bytes.
  const fs::path ppm = t.root / "mask.ppm";
  write_image(encode_mask(mask), ppm.string());
  const fs::path lab2 = t.root / "lab2.pgm";
  CHECK(run_cli(t, "decode --mask " + ppm.string() + " --out " + lab2.string())
            .code == 0);
  const fs::path ppm2 = t.root / "mask2.ppm";
  CHECK(run_cli(t, "encode --labels " + lab2.string() + " --out " +
                       ppm2.string())
            .code == 0);
  CHECK(slurp(ppm2) == slurp(ppm));

  // Labels above 7 are rejected as a domain error.
  GrayImage bad(2, 2, 9);
  const fs::path badp = t.root / "bad.pgm";
  write_gray(bad, badp.string());
  const RunResult r = run_cli(t, "encode --labels " + badp.string());
  CHECK(r.code == 1);
  CHECK(r.err.find("out of range") != std::string::npos);
}

TEST_CASE("channels splits a mask into per-category binaries") {
  TempTree t("channels");
  LabelMap mask(4, 2, 0);
  mask.set(0, 0, 1);  // HD
  mask.set(1, 0, 4);  // RO
  const fs::path color = t.root / "scene.png";
  write_image(encode_mask(mask), color.string());
  const fs::path dir = t.root / "out";

  CHECK(run_cli(t, "channels --mask " + color.string() + " --mode major5 " +
                       "--out-dir " + dir.string())
            .code == 0);
  for (const char* name : {"HD", "WR", "RO", "RI", "FV"})
    CHECK(fs::exists(dir / ("scene_" + std::string(name) + ".png")));
  const GrayImage hd = read_gray((dir / "scene_HD.png").string());
  CHECK(hd.pixels[0] == 255);
  for (size_t i = 1; i < hd.pixels.size(); ++i) CHECK(hd.pixels[i] == 0);
  const GrayImage ro = read_gray((dir / "scene_RO.png").string());
  CHECK(ro.pixels[1] == 255);
  CHECK(ro.pixels[0] == 0);
}

TEST_CASE("saliency collapses the four foreground groups") {
  TempTree t("saliency");
  LabelMap mask(4, 1);
  mask.set(0, 0, 1);  // HD -> on
  mask.set(1, 0, 2);  // PF -> off
  mask.set(2, 0, 6);  // FV -> on
  mask.set(3, 0, 0);  // BW -> off
  const fs::path color = t.root / "m.png";
  write_image(encode_mask(mask), color.string());
  const fs::path out = t.root / "sal.png";
  CHECK(run_cli(t, "saliency --mask " + color.string() + " --out " +
                       out.string())
            .code == 0);
  const GrayImage g = read_gray(out.string());
  CHECK(g.pixels == std::vector<uint8_t>{255, 0, 255, 0});
}

TEST_CASE("eval scores a prediction directory against ground truth") {
  TempTree t("eval");
  fs::create_directories(t.root / "pred");
  fs::create_directories(t.root / "gt");
  std::mt19937_64 rng(5);
  for (int i = 0; i < 3; ++i) {
    const std::string stem = "im" + std::to_string(i);
    const LabelMap gt = random_mask(rng, 8, 8);
    LabelMap pred = gt;
    pred.set(0, 0, (pred.at(0, 0) + 1) % 8);  // one wrong pixel
    write_image(encode_mask(pred), (t.root / "pred" / (stem + ".png")).string());
    write_image(encode_mask(gt), (t.root / "gt" / (stem + ".png")).string());
  }
  // One unpaired file on each side.
  write_image(encode_mask(random_mask(rng, 8, 8)),
              (t.root / "pred/extra_pred.png").string());
  write_image(encode_mask(random_mask(rng, 8, 8)),
              (t.root / "gt/extra_gt.png").string());

  const std::string base = (t.root / "report").string();
  const std::string cmd = "eval --pred " + (t.root / "pred").string() +
                          " --gt " + (t.root / "gt").string() +
                          " --mode major5 --per-image --out " + base;
  CHECK(run_cli(t, cmd).code == 0);

  const std::string csv = slurp(base + ".csv");
  CHECK(csv.rfind("category,f_mean,f_spread,iou_mean,iou_spread,n\n", 0) == 0);
  const size_t hd = csv.find("\nHD,"), wr = csv.find("\nWR,"),
               ro = csv.find("\nRO,"), ri = csv.find("\nRI,"),
               fv = csv.find("\nFV,"), comb = csv.find("\ncombined,");
  CHECK(hd != std::string::npos);
  CHECK(hd < wr);
  CHECK(wr < ro);
  CHECK(ro < ri);
  CHECK(ri < fv);
  CHECK(fv < comb);

  const nlohmann::json j = nlohmann::json::parse(slurp(base + ".json"));
  CHECK(j["n_images"] == 3);
  bool pred_warn = false, gt_warn = false;
  for (const auto& w : j["warnings"]) {
    const std::string s = w.get<std::string>();
    if (s.find("extra_pred") != std::string::npos) pred_warn = true;
    if (s.find("extra_gt") != std::string::npos) gt_warn = true;
  }
  CHECK(pred_warn);
  CHECK(gt_warn);

  const std::string per_img = slurp(base + "_images.csv");
  CHECK(per_img.rfind("stem,", 0) == 0);
  CHECK(per_img.find("im0,") != std::string::npos);

  // Identical rerun produces identical artifacts.
  const std::string base2 = (t.root / "report2").string();
  CHECK(run_cli(t, "eval --pred " + (t.root / "pred").string() + " --gt " +
                       (t.root / "gt").string() +
                       " --mode major5 --per-image --out " + base2)
            .code == 0);
  CHECK(slurp(base2 + ".csv") == slurp(base + ".csv"));
  CHECK(slurp(base2 + ".json") == slurp(base + ".json"));

  // Without --out the report lands on stdout.
  const RunResult direct =
      run_cli(t, "eval --pred " + (t.root / "pred").string() + " --gt " +
                     (t.root / "gt").string() + " --mode major5");
  CHECK(direct.code == 0);
  CHECK(direct.out.rfind("category,", 0) == 0);

  // No overlapping stems at all is a domain error.
  fs::create_directories(t.root / "empty");
  CHECK(run_cli(t, "eval --pred " + (t.root / "empty").string() + " --gt " +
                       (t.root / "gt").string())
            .code == 1);
}

TEST_CASE("stats writes csv tables and chart images") {
  TempTree t("stats");
  fs::create_directories(t.root / "masks");
  fs::create_directories(t.root / "images");
  std::mt19937_64 rng(6);
  std::vector<LabelMap> masks;
  for (int i = 0; i < 4; ++i) {
    const LabelMap m = random_mask(rng, 6, 6);
    masks.push_back(m);
    write_image(encode_mask(m),
                (t.root / "masks" / ("m" + std::to_string(i) + ".png")).string());
    write_image(random_image(rng, 6, 6),
                (t.root / "images" / ("m" + std::to_string(i) + ".png")).string());
  }

  const std::string base = (t.root / "st").string();
  CHECK(run_cli(t, "stats --masks " + (t.root / "masks").string() +
                       " --images " + (t.root / "images").string() +
                       " --bins 8 --out " + base)
            .code == 0);
  for (const char* suffix :
       {"_occurrence.csv", "_correlation.csv", "_intensity.csv",
        "_occurrence.png", "_correlation.png", "_intensity.png"})
    CHECK(fs::exists(base + suffix));
  CHECK(slurp(base + "_occurrence.csv") ==
        occurrence_csv(occurrence_counts(masks)));

  // A single mask cannot support the correlation table.
  fs::create_directories(t.root / "one");
  write_image(encode_mask(masks[0]), (t.root / "one/m.png").string());
  CHECK(run_cli(t, "stats --masks " + (t.root / "one").string()).code == 1);
}

TEST_CASE("train writes a checkpoint and a reproducible loss history") {
  TempTree t("train");
  const fs::path spec = make_train_fixture(t, 4, 32);
  const std::string data = (t.root / "data").string();
  const std::string base = (t.root / "run1").string();
  const std::string common = "train --data " + data + " --spec " +
                             spec.string() +
                             " --mode major5 --epochs 2 --batch 2 --lr 0.001 "
                             "--seed 5 --out ";

  const RunResult r1 = run_cli(t, common + base);
  CHECK(r1.code == 0);
  CHECK(r1.out.find("pairs=4 epochs=2 params=") != std::string::npos);
  CHECK(r1.out.find("final_loss=") != std::string::npos);
  CHECK(fs::exists(base + ".ckpt"));
  const std::string hist1 = slurp(base + "_history.csv");
  CHECK(hist1.rfind("epoch,train_loss\n", 0) == 0);

  const std::string base2 = (t.root / "run2").string();
  const RunResult r2 = run_cli(t, common + base2);
  CHECK(r2.code == 0);
  CHECK(slurp(base2 + "_history.csv") == hist1);

  SUBCASE("zero epochs still snapshots the initial parameters") {
    const std::string base0 = (t.root / "run0").string();
    const RunResult r0 = run_cli(t, "train --data " + data + " --spec " +
                                        spec.string() +
                                        " --mode major5 --epochs 0 --out " +
                                        base0);
    CHECK(r0.code == 0);
    CHECK(fs::exists(base0 + ".ckpt"));
    CHECK(slurp(base0 + "_history.csv") == "epoch,train_loss\n");
  }

  SUBCASE("--variant and --spec are mutually exclusive") {
    CHECK(run_cli(t, "train --data " + data + " --variant rsb --spec " +
                         spec.string())
              .code == 2);
  }

  SUBCASE("inference consumes the checkpoint") {
    const std::string odir = (t.root / "inferred").string();
    const std::string img = (t.root / "data/images/p0.png").string();
    CHECK(run_cli(t, "infer --checkpoint " + base + ".ckpt --image " + img +
                         " --mode major5 --out-dir " + odir)
              .code == 0);
    for (const char* name : {"HD", "WR", "RO", "RI", "FV"})
      CHECK(fs::exists(fs::path(odir) / ("p0_" + std::string(name) + ".png")));
    CHECK(fs::exists(fs::path(odir) / "p0_mask.png"));
    const GrayImage hd = read_gray((fs::path(odir) / "p0_HD.png").string());
    for (auto v : hd.pixels) CHECK((v == 0 || v == 255));

    // The mask png must hold only palette colors.
    const RgbImage mask = read_image((fs::path(odir) / "p0_mask.png").string());
    for (size_t i = 0; i < mask.pixels.size(); ++i)
      CHECK((mask.pixels[i] == 0 || mask.pixels[i] == 255));

    // A five-channel checkpoint cannot serve an eight-channel mode.
    const RunResult bad = run_cli(t, "infer --checkpoint " + base +
                                         ".ckpt --image " + img +
                                         " --mode full8 --out-dir " + odir);
    CHECK(bad.code == 1);
    CHECK(bad.err.find("channels") != std::string::npos);
  }
}

TEST_CASE("bench reports a frame rate") {
  TempTree t("bench");
  const RunResult r =
      run_cli(t, "bench --variant rsb --resolution 32x32 --frames 1");
  CHECK(r.code == 0);
  CHECK(r.out.find("fps") != std::string::npos);
  CHECK(run_cli(t, "bench --resolution nonsense").code == 1);
}
