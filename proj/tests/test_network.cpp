#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "suimkit/checkpoint.hpp"
#include "suimkit/network.hpp"

using namespace suim;
using namespace suim::nn;

namespace {

// Narrow residual-variant spec that keeps unit tests fast.
NetworkSpec small_rsb_spec(int width = 32, int height = 32, int out = 2) {
  NetworkSpec s;
  s.variant = "rsb";
  s.width = width;
  s.height = height;
  s.out_channels = out;
  s.seed = 7;
  s.rsb.stem_filters = 8;
  s.rsb.stage_filters = {16, 32};
  s.rsb.stage_blocks = {3, 4};
  s.rsb.decoder_filters = {32, 24, 16};
  s.rsb.up_filters = {24, 16, 8};
  return s;
}

Tensor random_input(int n, int c, int h, int w, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor t(n, c, h, w);
  for (double& v : t.data) v = u(rng);
  return t;
}

std::string slurp_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void spit_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), std::streamsize(bytes.size()));
}

std::filesystem::path tmp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("suimkit_nettest_" + name);
}

}  // namespace

TEST_CASE("graph builder wires layers and validates ids") {
  GraphBuilder g;
  const int in = g.input(3);
  const int c1 = g.conv(in, 8, 3, 1, 1);
  CHECK(g.channels_of(c1) == 8);
  const int r1 = g.relu(c1);
  Network net = g.finish(r1);
  CHECK(net.input_id == in);
  CHECK(net.output_id == r1);
  CHECK(net.param_count() == 3 * 3 * 3 * 8 + 8);  // weights + bias

  GraphBuilder bad;
  CHECK_THROWS_AS(bad.conv(0, 4, 3, 1, 1), ConfigError);
  GraphBuilder two;
  two.input(3);
  const int second = two.input(3);  // caught when the graph is finished
  CHECK_THROWS_AS(two.finish(second), ConfigError);
  GraphBuilder addg;
  const int i2 = addg.input(3);
  const int c2 = addg.conv(i2, 4, 1, 1, 0);
  const int c3 = addg.conv(i2, 6, 1, 1, 0);
  CHECK_THROWS_AS(addg.add(c2, c3), ConfigError);
}

TEST_CASE("residual block with a zeroed conv path passes relu of its input") {
  GraphBuilder g;
  const int in = g.input(4);
  const int out = rsb_block(g, in, 4, 1, SkipPath::Identity);
  Network net = g.finish(out);
  // Fresh parameter tensors are zero, so the bottleneck path contributes
  // nothing and the residual add sees only the identity skip.
  const Tensor x = random_input(2, 4, 6, 6, 3);
  const Tensor y = net.forward(x, RunMode::Train);
  REQUIRE(y.same_shape(x));
  for (size_t i = 0; i < x.size(); ++i)
    CHECK(y.data[i] == (x.data[i] > 0 ? x.data[i] : 0.0));
}

TEST_CASE("residual block configuration guards") {
  GraphBuilder g;
  const int in = g.input(4);
  CHECK_THROWS_AS(rsb_block(g, in, 5, 1), ConfigError);  // odd width
  CHECK_THROWS_AS(rsb_block(g, in, 4, 2, SkipPath::Identity), ConfigError);
  CHECK_THROWS_AS(rsb_block(g, in, 8, 1, SkipPath::Identity), ConfigError);
  // Auto picks a projection when the shape changes; this must not throw.
  const int out = rsb_block(g, in, 8, 2);
  CHECK(g.channels_of(out) == 8);
}

TEST_CASE("network spec json round trip") {
  NetworkSpec s = small_rsb_spec(64, 48, 3);
  s.variant = "rsb";
  s.seed = 123;
  const std::string js = s.to_json();
  const NetworkSpec r = NetworkSpec::from_json(js);
  CHECK(r.variant == s.variant);
  CHECK(r.width == s.width);
  CHECK(r.height == s.height);
  CHECK(r.in_channels == s.in_channels);
  CHECK(r.out_channels == s.out_channels);
  CHECK(r.seed == s.seed);
  CHECK(r.rsb.stem_filters == s.rsb.stem_filters);
  CHECK(r.rsb.stage_filters == s.rsb.stage_filters);
  CHECK(r.rsb.stage_blocks == s.rsb.stage_blocks);
  CHECK(r.rsb.decoder_filters == s.rsb.decoder_filters);
  CHECK(r.rsb.up_filters == s.rsb.up_filters);
  CHECK(r.vgg.block_filters == s.vgg.block_filters);

  CHECK_THROWS_AS(NetworkSpec::from_json("{not json"), ConfigError);
  CHECK_THROWS_AS(NetworkSpec::from_json("{\"width\": \"wide\"}"), ConfigError);
}

TEST_CASE("build_network validates its configuration") {
  NetworkSpec s = small_rsb_spec();
  s.rsb.stage_blocks = {2, 4};  // six blocks total
  CHECK_THROWS_AS(build_network(s), ConfigError);
  s.rsb.stage_blocks = {4, 3};  // still seven, different split
  CHECK_NOTHROW(build_network(s));

  NetworkSpec bad_variant = small_rsb_spec();
  bad_variant.variant = "unet";
  CHECK_THROWS_AS(build_network(bad_variant), ConfigError);

  NetworkSpec bad_res = small_rsb_spec();
  bad_res.width = 100;
  bad_res.height = 37;
  CHECK_THROWS_AS(build_network(bad_res), ConfigError);

  NetworkSpec vgg_res = reference_spec("vgg");
  vgg_res.width = 100;  // not divisible by 16
  CHECK_THROWS_AS(build_network(vgg_res), ConfigError);

  NetworkSpec bad_ch = small_rsb_spec();
  bad_ch.out_channels = 0;
  CHECK_THROWS_AS(build_network(bad_ch), ConfigError);
}

TEST_CASE("reference parameter budgets") {
  const NetworkSpec rsb = reference_spec("rsb");
  CHECK(rsb.width == 320);
  CHECK(rsb.height == 240);
  Network a = build_network(rsb);
  CHECK(a.param_count() == 3850373);
  CHECK(a.param_count() >= 3500000);
  CHECK(a.param_count() <= 4200000);

  NetworkSpec rsb2 = rsb;
  rsb2.seed = 4242;  // the count is a property of the architecture
  Network b = build_network(rsb2);
  CHECK(b.param_count() == a.param_count());

  const NetworkSpec vgg = reference_spec("vgg");
  CHECK(vgg.width == 320);
  CHECK(vgg.height == 256);
  Network c = build_network(vgg);
  CHECK(c.param_count() == 12231365);
  CHECK(c.param_count() >= 11500000);
  CHECK(c.param_count() <= 13000000);
}

TEST_CASE("forward produces input-resolution sigmoid maps") {
  const NetworkSpec s = small_rsb_spec(64, 48, 3);
  Network net = build_network(s);
  const Tensor x = random_input(1, 3, 48, 64, 11);
  const Tensor y = net.forward(x, RunMode::Train);
  CHECK(y.n == 1);
  CHECK(y.c == 3);
  CHECK(y.h == 48);
  CHECK(y.w == 64);
  for (double v : y.data) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  double mean = 0.0;
  for (double v : y.data) mean += v;
  mean /= double(y.size());
  CHECK(std::abs(mean - 0.5) < 0.2);  // fresh heads sit near the midpoint

  const Tensor batch = random_input(2, 3, 48, 64, 12);
  const Tensor yb = net.forward(batch, RunMode::Train);
  CHECK(yb.n == 2);

  const Tensor wrong = random_input(1, 3, 32, 32, 13);
  CHECK_THROWS_AS(net.forward(wrong, RunMode::Train), ShapeError);
}

TEST_CASE("initialization is deterministic in the seed") {
  const NetworkSpec s = small_rsb_spec();
  Network a = build_network(s);
  Network b = build_network(s);
  const Tensor x = random_input(1, 3, 32, 32, 21);
  const Tensor ya = a.forward(x, RunMode::Train);
  const Tensor yb = b.forward(x, RunMode::Train);
  CHECK(ya.data == yb.data);

  NetworkSpec s2 = s;
  s2.seed = s.seed + 1;
  Network c = build_network(s2);
  const Tensor yc = c.forward(x, RunMode::Train);
  CHECK(ya.data != yc.data);

  // Infer mode is deterministic too and leaves running stats untouched.
  const Tensor i1 = a.forward(x, RunMode::Infer);
  const Tensor i2 = a.forward(x, RunMode::Infer);
  CHECK(i1.data == i2.data);
}

TEST_CASE("train_step lowers the loss on a fixed batch") {
  const NetworkSpec s = small_rsb_spec(16, 16, 2);
  Network net = build_network(s);
  const Tensor x = random_input(2, 3, 16, 16, 31);
  Tensor target(2, 2, 16, 16);
  std::mt19937_64 rng(32);
  std::bernoulli_distribution coin(0.5);
  for (double& v : target.data) v = coin(rng) ? 1.0 : 0.0;

  AdamConfig cfg;
  cfg.lr = 1e-3;
  AdamState opt(cfg);
  const double first = net.train_step(x, target, opt);
  double last = first;
  for (int i = 0; i < 29; ++i) last = net.train_step(x, target, opt);
  CHECK(last < first);

  // A zero learning rate leaves the parameters (and the loss) unchanged.
  Network frozen = build_network(s);
  AdamState noop{AdamConfig{0.0, 0.5, 0.999, 1e-8}};
  const double l1 = frozen.train_step(x, target, noop);
  const double l2 = frozen.train_step(x, target, noop);
  CHECK(l1 == l2);
}

TEST_CASE("fit respects epochs, seeding, and the validation split") {
  const NetworkSpec s = small_rsb_spec(16, 16, 2);
  std::vector<TrainSample> data;
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> px(0, 255);
  std::uniform_int_distribution<int> cls(0, 7);
  for (int i = 0; i < 4; ++i) {
    RgbImage img(16, 16);
    for (auto& v : img.pixels) v = uint8_t(px(rng));
    LabelMap mask(16, 16);
    for (auto& v : mask.labels) v = uint8_t(cls(rng));
    data.push_back({img, mask, "s" + std::to_string(i)});
  }
  const ClassConfig cfg = ClassConfig::major5();

  SUBCASE("zero epochs trains nothing") {
    NetworkSpec s5 = s;
    s5.out_channels = 5;
    Network net = build_network(s5);
    std::vector<std::vector<double>> before;
    for (Tensor* p : net.parameters()) before.push_back(p->data);
    FitOptions opts;
    opts.epochs = 0;
    const FitHistory h = fit(net, data, cfg, opts);
    CHECK(h.train_loss.empty());
    CHECK(h.val_loss.empty());
    size_t k = 0;
    for (Tensor* p : net.parameters()) CHECK(p->data == before[k++]);
  }

  SUBCASE("equal seeds reproduce the loss history") {
    NetworkSpec s5 = s;
    s5.out_channels = 5;
    FitOptions opts;
    opts.epochs = 3;
    opts.batch_size = 2;
    opts.augment = true;
    Network n1 = build_network(s5);
    Network n2 = build_network(s5);
    const FitHistory h1 = fit(n1, data, cfg, opts);
    const FitHistory h2 = fit(n2, data, cfg, opts);
    CHECK(h1.train_loss == h2.train_loss);
    REQUIRE(h1.train_loss.size() == 3);
  }

  SUBCASE("validation fraction holds out the trailing samples") {
    NetworkSpec s5 = s;
    s5.out_channels = 5;
    Network net = build_network(s5);
    FitOptions opts;
    opts.epochs = 2;
    opts.val_fraction = 0.5;
    const FitHistory h = fit(net, data, cfg, opts);
    CHECK(h.train_loss.size() == 2);
    CHECK(h.val_loss.size() == 2);
  }

  SUBCASE("bad options rejected") {
    NetworkSpec s5 = s;
    s5.out_channels = 5;
    Network net = build_network(s5);
    FitOptions opts;
    opts.batch_size = 0;
    CHECK_THROWS_AS(fit(net, data, cfg, opts), ConfigError);
    FitOptions opts2;
    opts2.val_fraction = 1.0;
    CHECK_THROWS_AS(fit(net, data, cfg, opts2), ConfigError);
    std::vector<TrainSample> none;
    FitOptions opts3;
    CHECK_THROWS_AS(fit(net, none, cfg, opts3), ConfigError);
  }
}

TEST_CASE("checkpoint round trip preserves behaviour bit for bit") {
  const NetworkSpec s = small_rsb_spec(16, 16, 2);
  Network net = build_network(s);
  // A couple of updates so the running stats differ from their defaults.
  const Tensor x = random_input(2, 3, 16, 16, 51);
  Tensor target = Tensor::full(2, 2, 16, 16, 1.0);
  AdamState opt;
  net.train_step(x, target, opt);
  net.train_step(x, target, opt);

  const auto path = tmp_file("roundtrip.ckpt");
  save_checkpoint(path.string(), net);
  Network back = load_checkpoint(path.string());
  CHECK(back.spec.variant == "rsb");
  CHECK(back.param_count() == net.param_count());

  const Tensor probe = random_input(1, 3, 16, 16, 52);
  const Tensor ya = net.forward(probe, RunMode::Infer);
  const Tensor yb = back.forward(probe, RunMode::Infer);
  CHECK(ya.data == yb.data);
  std::filesystem::remove(path);
}

TEST_CASE("corrupt checkpoints are rejected") {
  const NetworkSpec s = small_rsb_spec(16, 16, 2);
  Network net = build_network(s);
  const auto path = tmp_file("corrupt.ckpt");
  save_checkpoint(path.string(), net);
  const std::string good = slurp_bytes(path.string());
  REQUIRE(good.size() > 64);

  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_checkpoint("/nonexistent/model.ckpt"), IoError);
  }
  SUBCASE("truncation") {
    spit_bytes(path.string(), good.substr(0, good.size() / 2));
    CHECK_THROWS_AS(load_checkpoint(path.string()), IoError);
  }
  SUBCASE("bad magic") {
    std::string bad = good;
    bad[0] = 'X';
    spit_bytes(path.string(), bad);
    CHECK_THROWS_AS(load_checkpoint(path.string()), IoError);
  }
  SUBCASE("unsupported version") {
    std::string bad = good;
    bad[8] = char(0x7f);  // version u32 follows the 8-byte magic
    spit_bytes(path.string(), bad);
    CHECK_THROWS_AS(load_checkpoint(path.string()), IoError);
  }
  SUBCASE("trailing garbage") {
    spit_bytes(path.string(), good + "extra");
    CHECK_THROWS_AS(load_checkpoint(path.string()), IoError);
  }
  SUBCASE("spec/record shape mismatch") {
    // Bump out_channels inside the embedded spec so the stored head
    // weights no longer match the rebuilt graph.
    std::string bad = good;
    const std::string key = "\"out_channels\":2";
    const size_t pos = bad.find(key);
    REQUIRE(pos != std::string::npos);
    bad[pos + key.size() - 1] = '3';
    spit_bytes(path.string(), bad);
    CHECK_THROWS_AS(load_checkpoint(path.string()), IoError);
  }
  std::filesystem::remove(path);
}

TEST_CASE("tensor conversions") {
  RgbImage img(2, 2);
  img.set(0, 0, {255, 0, 0});
  img.set(1, 0, {0, 255, 0});
  img.set(0, 1, {0, 0, 255});
  img.set(1, 1, {51, 102, 153});
  const Tensor t = image_to_tensor(img);
  CHECK(t.n == 1);
  CHECK(t.c == 3);
  CHECK(t.h == 2);
  CHECK(t.w == 2);
  CHECK(t.at(0, 0, 0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(t.at(0, 1, 0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(t.at(0, 2, 1, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(t.at(0, 0, 1, 1) == doctest::Approx(51.0 / 255.0).epsilon(1e-15));

  LabelMap mask(2, 1);
  mask.set(0, 0, 1);  // HD
  mask.set(1, 0, 2);  // PF, background for major5
  const Tensor tgt = mask_to_target(mask, ClassConfig::major5());
  CHECK(tgt.c == 5);
  CHECK(tgt.at(0, 0, 0, 0) == 1.0);
  CHECK(tgt.at(0, 0, 0, 1) == 0.0);
  for (int c = 1; c < 5; ++c) {
    CHECK(tgt.at(0, c, 0, 0) == 0.0);
    CHECK(tgt.at(0, c, 0, 1) == 0.0);
  }

  const auto maps = tensor_to_realmaps(t, 0);
  REQUIRE(maps.size() == 3);
  CHECK(maps[0].at(1, 1) == doctest::Approx(51.0 / 255.0).epsilon(1e-15));
  CHECK_THROWS_AS(tensor_to_realmaps(t, 1), ShapeError);
}
