#include "suimkit/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>

#include "json.hpp"

namespace suim::nn {

namespace {

const char* kind_label(OpKind k) {
  switch (k) {
    case OpKind::Input: return "input";
    case OpKind::Conv: return "conv";
    case OpKind::TConv: return "tconv";
    case OpKind::BatchNorm: return "bn";
    case OpKind::ReLU: return "relu";
    case OpKind::Sigmoid: return "sigmoid";
    case OpKind::MaxPool: return "pool";
    case OpKind::Concat: return "concat";
    case OpKind::Add: return "add";
  }
  return "node";
}

void add_into(Tensor& dst, const Tensor& src) {
  if (!dst.same_shape(src)) throw ShapeError("gradient accumulate mismatch");
  for (size_t i = 0; i < src.size(); ++i) dst.data[i] += src.data[i];
}

void add_grad(Tensor& param, const Tensor& g) {
  param.ensure_grad();
  if (param.grad.size() != g.size())
    throw ShapeError("parameter gradient mismatch");
  for (size_t i = 0; i < g.size(); ++i) param.grad[i] += g.data[i];
}

}  // namespace

// ---------------------------------------------------------------- spec json

std::string NetworkSpec::to_json() const {
  nlohmann::json j;
  j["variant"] = variant;
  j["width"] = width;
  j["height"] = height;
  j["in_channels"] = in_channels;
  j["out_channels"] = out_channels;
  j["seed"] = seed;
  j["rsb"] = {{"stem_filters", rsb.stem_filters},
              {"stage_filters", rsb.stage_filters},
              {"stage_blocks", rsb.stage_blocks},
              {"decoder_filters", rsb.decoder_filters},
              {"up_filters", rsb.up_filters}};
  j["vgg"] = {{"block_filters", vgg.block_filters},
              {"decoder_filters", vgg.decoder_filters},
              {"up_filters", vgg.up_filters},
              {"final_filters", vgg.final_filters}};
  return j.dump();
}

NetworkSpec NetworkSpec::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("network spec: invalid json");
  }
  NetworkSpec s;
  try {
    s.variant = j.value("variant", s.variant);
    s.width = j.value("width", s.width);
    s.height = j.value("height", s.height);
    s.in_channels = j.value("in_channels", s.in_channels);
    s.out_channels = j.value("out_channels", s.out_channels);
    s.seed = j.value("seed", s.seed);
    if (j.contains("rsb")) {
      const auto& r = j.at("rsb");
      s.rsb.stem_filters = r.value("stem_filters", s.rsb.stem_filters);
      if (r.contains("stage_filters"))
        r.at("stage_filters").get_to(s.rsb.stage_filters);
      if (r.contains("stage_blocks"))
        r.at("stage_blocks").get_to(s.rsb.stage_blocks);
      if (r.contains("decoder_filters"))
        r.at("decoder_filters").get_to(s.rsb.decoder_filters);
      if (r.contains("up_filters")) r.at("up_filters").get_to(s.rsb.up_filters);
    }
    if (j.contains("vgg")) {
      const auto& v = j.at("vgg");
      if (v.contains("block_filters"))
        v.at("block_filters").get_to(s.vgg.block_filters);
      if (v.contains("decoder_filters"))
        v.at("decoder_filters").get_to(s.vgg.decoder_filters);
      if (v.contains("up_filters")) v.at("up_filters").get_to(s.vgg.up_filters);
      s.vgg.final_filters = v.value("final_filters", s.vgg.final_filters);
    }
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("network spec: malformed field");
  }
  return s;
}

NetworkSpec reference_spec(const std::string& variant) {
  NetworkSpec s;
  s.variant = variant;
  if (variant == "rsb") {
    s.width = 320;
    s.height = 240;
  } else if (variant == "vgg") {
    s.width = 320;
    s.height = 256;
  } else {
    throw ConfigError("unknown variant: " + variant);
  }
  return s;
}

// ------------------------------------------------------------ graph builder

int GraphBuilder::check(int id) const {
  if (id < 0 || id >= int(nodes_.size()))
    throw ConfigError("graph builder: bad node id");
  return id;
}

int GraphBuilder::push(Node node, int channels) {
  const int id = int(nodes_.size());
  if (node.name.empty())
    node.name = std::string(kind_label(node.kind)) + std::to_string(id);
  nodes_.push_back(std::move(node));
  channels_.push_back(channels);
  return id;
}

int GraphBuilder::channels_of(int id) const { return channels_[check(id)]; }

int GraphBuilder::input(int channels, std::string name) {
  if (channels < 1) throw ConfigError("input: channels must be positive");
  Node n;
  n.kind = OpKind::Input;
  n.name = std::move(name);
  return push(std::move(n), channels);
}

int GraphBuilder::conv(int from, int filters, int k, int stride, int pad,
                       std::string name) {
  const int in_ch = channels_of(from);
  if (filters < 1 || k < 1 || stride < 1 || pad < 0)
    throw ConfigError("conv: bad layer geometry");
  Node n;
  n.kind = OpKind::Conv;
  n.name = std::move(name);
  n.inputs = {from};
  n.weight = Tensor(filters, in_ch, k, k);
  n.bias = Tensor(filters, 1, 1, 1);
  n.stride = stride;
  n.pad = pad;
  return push(std::move(n), filters);
}

int GraphBuilder::tconv(int from, int filters, int k, int stride,
                        std::string name) {
  const int in_ch = channels_of(from);
  if (filters < 1 || k < 1 || stride < 1)
    throw ConfigError("tconv: bad layer geometry");
  Node n;
  n.kind = OpKind::TConv;
  n.name = std::move(name);
  n.inputs = {from};
  n.weight = Tensor(in_ch, filters, k, k);
  n.bias = Tensor(filters, 1, 1, 1);
  n.stride = stride;
  return push(std::move(n), filters);
}

int GraphBuilder::batch_norm(int from, std::string name) {
  const int c = channels_of(from);
  Node n;
  n.kind = OpKind::BatchNorm;
  n.name = std::move(name);
  n.inputs = {from};
  n.gamma = Tensor::full(c, 1, 1, 1, 1.0);
  n.beta = Tensor(c, 1, 1, 1);
  n.running_mean.assign(c, 0.0);
  n.running_var.assign(c, 1.0);
  return push(std::move(n), c);
}

int GraphBuilder::relu(int from, std::string name) {
  const int c = channels_of(from);
  Node n;
  n.kind = OpKind::ReLU;
  n.name = std::move(name);
  n.inputs = {from};
  return push(std::move(n), c);
}

int GraphBuilder::sigmoid(int from, std::string name) {
  const int c = channels_of(from);
  Node n;
  n.kind = OpKind::Sigmoid;
  n.name = std::move(name);
  n.inputs = {from};
  return push(std::move(n), c);
}

int GraphBuilder::max_pool(int from, std::string name) {
  const int c = channels_of(from);
  Node n;
  n.kind = OpKind::MaxPool;
  n.name = std::move(name);
  n.inputs = {from};
  return push(std::move(n), c);
}

int GraphBuilder::concat(int a, int b, std::string name) {
  const int ca = channels_of(a), cb = channels_of(b);
  Node n;
  n.kind = OpKind::Concat;
  n.name = std::move(name);
  n.inputs = {a, b};
  return push(std::move(n), ca + cb);
}

int GraphBuilder::add(int a, int b, std::string name) {
  const int ca = channels_of(a), cb = channels_of(b);
  if (ca != cb) throw ConfigError("add: channel mismatch");
  Node n;
  n.kind = OpKind::Add;
  n.name = std::move(name);
  n.inputs = {a, b};
  return push(std::move(n), ca);
}

Network GraphBuilder::finish(int output_id, NetworkSpec spec) {
  check(output_id);
  Network net;
  net.spec = std::move(spec);
  net.nodes = std::move(nodes_);
  net.output_id = output_id;
  net.input_id = -1;
  for (int i = 0; i < int(net.nodes.size()); ++i) {
    if (net.nodes[i].kind == OpKind::Input) {
      if (net.input_id != -1)
        throw ConfigError("graph builder: multiple input nodes");
      net.input_id = i;
    }
    for (int j : net.nodes[i].inputs) {
      if (j < 0 || j >= i)
        throw ConfigError("graph builder: inputs must precede consumers");
      net.nodes[j].last_use = std::max(net.nodes[j].last_use, i);
    }
  }
  if (net.input_id == -1) throw ConfigError("graph builder: no input node");
  nodes_.clear();
  channels_.clear();
  return net;
}

int rsb_block(GraphBuilder& g, int from, int filters, int stride,
              SkipPath skip, const std::string& label) {
  if (filters % 2 != 0) throw ConfigError("rsb_block: filters must be even");
  const int half = filters / 2;
  const int in_ch = g.channels_of(from);
  const bool shape_change = stride != 1 || in_ch != filters;
  if (skip == SkipPath::Identity && shape_change)
    throw ConfigError("rsb_block: identity skip needs matching shape");
  const bool project =
      skip == SkipPath::Projection || (skip == SkipPath::Auto && shape_change);

  int t = g.conv(from, half, 1, stride, 0, label + "_c1");
  t = g.relu(g.batch_norm(t, label + "_bn1"));
  t = g.conv(t, half, 3, 1, 1, label + "_c2");
  t = g.relu(g.batch_norm(t, label + "_bn2"));
  t = g.conv(t, filters, 1, 1, 0, label + "_c3");
  t = g.batch_norm(t, label + "_bn3");

  int sk = from;
  if (project) {
    sk = g.conv(from, filters, 1, stride, 0, label + "_proj");
    sk = g.batch_norm(sk, label + "_projbn");
  }
  return g.relu(g.add(t, sk), label + "_out");
}

// ------------------------------------------------------- reference networks

namespace {

Network build_rsb(const NetworkSpec& spec) {
  const RsbConfig& r = spec.rsb;
  if (r.stage_blocks[0] + r.stage_blocks[1] != 7)
    throw ConfigError("residual encoder must contain exactly seven blocks");
  if (r.stage_blocks[0] < 1 || r.stage_blocks[1] < 1)
    throw ConfigError("residual encoder: each stage needs at least one block");
  if (spec.width % 8 != 0 || spec.height % 8 != 0)
    throw ConfigError("rsb variant needs width and height divisible by 8");

  GraphBuilder g;
  int x = g.input(spec.in_channels);
  int t = g.conv(x, r.stem_filters, 5, 1, 2, "stem1");
  t = g.relu(g.batch_norm(t, "stem1_bn"));
  t = g.conv(t, r.stem_filters, 3, 2, 1, "stem2");
  const int e1 = g.relu(g.batch_norm(t, "stem2_bn"));  // stem_filters @ /2

  t = e1;
  for (int i = 0; i < r.stage_blocks[0]; ++i)
    t = rsb_block(g, t, r.stage_filters[0], i == 0 ? 2 : 1, SkipPath::Auto,
                  "s2b" + std::to_string(i));
  const int e2 = t;  // stage_filters[0] @ /4
  for (int i = 0; i < r.stage_blocks[1]; ++i)
    t = rsb_block(g, t, r.stage_filters[1], i == 0 ? 2 : 1, SkipPath::Auto,
                  "s3b" + std::to_string(i));
  // bottleneck: stage_filters[1] @ /8

  t = g.conv(t, r.decoder_filters[0], 3, 1, 1, "d1");
  t = g.relu(g.batch_norm(t, "d1_bn"));
  t = g.tconv(t, r.up_filters[0], 2, 2, "up1");  // /4

  t = g.concat(t, e2, "skip2");
  t = g.conv(t, r.decoder_filters[1], 3, 1, 1, "d2");
  t = g.relu(g.batch_norm(t, "d2_bn"));
  t = g.tconv(t, r.up_filters[1], 2, 2, "up2");  // /2

  t = g.concat(t, e1, "skip1");
  t = g.conv(t, r.decoder_filters[2], 3, 1, 1, "d3");
  t = g.relu(g.batch_norm(t, "d3_bn"));
  t = g.tconv(t, r.up_filters[2], 2, 2, "up3");  // /1

  t = g.conv(t, spec.out_channels, 3, 1, 1, "head");
  int out = g.sigmoid(t, "probs");
  return g.finish(out, spec);
}

Network build_vgg(const NetworkSpec& spec) {
  const VggConfig& v = spec.vgg;
  if (spec.width % 16 != 0 || spec.height % 16 != 0)
    throw ConfigError("vgg variant needs width and height divisible by 16");

  GraphBuilder g;
  int x = g.input(spec.in_channels);
  auto block = [&g](int from, int filters, int convs, const std::string& label) {
    int cur = from;
    for (int i = 0; i < convs; ++i)
      cur = g.relu(
          g.conv(cur, filters, 3, 1, 1, label + "_c" + std::to_string(i)));
    return cur;
  };
  const int b1 = block(x, v.block_filters[0], 2, "b1");   // /1
  int t = g.max_pool(b1, "p1");
  const int b2 = block(t, v.block_filters[1], 2, "b2");   // /2
  t = g.max_pool(b2, "p2");
  const int b3 = block(t, v.block_filters[2], 3, "b3");   // /4
  t = g.max_pool(b3, "p3");
  const int b4 = block(t, v.block_filters[3], 3, "b4");   // /8
  t = g.max_pool(b4, "p4");                               // /16

  t = g.conv(t, v.decoder_filters[0], 3, 1, 1, "d1");
  t = g.relu(g.batch_norm(t, "d1_bn"));
  t = g.tconv(t, v.up_filters[0], 2, 2, "up1");  // /8

  t = g.concat(t, b4, "skip4");
  t = g.conv(t, v.decoder_filters[1], 3, 1, 1, "d2");
  t = g.relu(g.batch_norm(t, "d2_bn"));
  t = g.tconv(t, v.up_filters[1], 2, 2, "up2");  // /4

  t = g.concat(t, b3, "skip3");
  t = g.conv(t, v.decoder_filters[2], 3, 1, 1, "d3");
  t = g.relu(g.batch_norm(t, "d3_bn"));
  t = g.tconv(t, v.up_filters[2], 2, 2, "up3");  // /2

  t = g.concat(t, b2, "skip2");
  t = g.relu(g.tconv(t, v.final_filters, 2, 2, "final_up"));  // /1

  t = g.concat(t, b1, "skip1");
  t = g.conv(t, spec.out_channels, 3, 1, 1, "head");
  int out = g.sigmoid(t, "probs");
  return g.finish(out, spec);
}

}  // namespace

Network build_network(const NetworkSpec& spec) {
  if (spec.in_channels < 1 || spec.out_channels < 1)
    throw ConfigError("network: channel counts must be positive");
  if (spec.width < 8 || spec.height < 8)
    throw ConfigError("network: resolution too small");
  Network net;
  if (spec.variant == "rsb")
    net = build_rsb(spec);
  else if (spec.variant == "vgg")
    net = build_vgg(spec);
  else
    throw ConfigError("unknown variant: " + spec.variant);
  net.enforce_input_shape = true;
  net.init_params(spec.seed);
  return net;
}

// ----------------------------------------------------------------- executor

Tensor Network::forward(const Tensor& x, RunMode mode) {
  if (input_id < 0 || output_id < 0) throw ConfigError("network: empty graph");
  if (enforce_input_shape &&
      (x.c != spec.in_channels || x.h != spec.height || x.w != spec.width))
    throw ShapeError("forward: input must be " +
                     std::to_string(spec.in_channels) + "x" +
                     std::to_string(spec.height) + "x" +
                     std::to_string(spec.width));
  for (Node& nd : nodes) nd.gout = Tensor{};
  nodes[input_id].out = x;
  const bool infer = mode == RunMode::Infer;
  for (int i = 0; i < int(nodes.size()); ++i) {
    Node& nd = nodes[i];
    switch (nd.kind) {
      case OpKind::Input:
        break;
      case OpKind::Conv:
        nd.out = conv2d(nodes[nd.inputs[0]].out, nd.weight, nd.bias, nd.stride,
                        nd.pad);
        break;
      case OpKind::TConv:
        nd.out = conv2d_transpose(nodes[nd.inputs[0]].out, nd.weight, nd.bias,
                                  nd.stride);
        break;
      case OpKind::BatchNorm:
        if (infer)
          nd.out = batch_norm_infer(nodes[nd.inputs[0]].out, nd.gamma, nd.beta,
                                    nd.running_mean, nd.running_var, kBnEps);
        else
          nd.out = batch_norm_train(nodes[nd.inputs[0]].out, nd.gamma, nd.beta,
                                    nd.running_mean, nd.running_var,
                                    kBnMomentum, kBnEps, nd.bn_cache);
        break;
      case OpKind::ReLU:
        nd.out = relu(nodes[nd.inputs[0]].out);
        break;
      case OpKind::Sigmoid:
        nd.out = sigmoid(nodes[nd.inputs[0]].out);
        break;
      case OpKind::MaxPool: {
        const Tensor& a = nodes[nd.inputs[0]].out;
        nd.pool_in[0] = a.n;
        nd.pool_in[1] = a.c;
        nd.pool_in[2] = a.h;
        nd.pool_in[3] = a.w;
        nd.out = max_pool2(a, nd.pool_argmax);
        break;
      }
      case OpKind::Concat: {
        const Tensor& a = nodes[nd.inputs[0]].out;
        const Tensor& b = nodes[nd.inputs[1]].out;
        nd.concat_a_channels = a.c;
        nd.out = concat_channels(a, b);
        break;
      }
      case OpKind::Add:
        nd.out = add(nodes[nd.inputs[0]].out, nodes[nd.inputs[1]].out);
        break;
    }
    if (infer) {
      // Free activations whose last consumer has just run.
      for (int j : nd.inputs)
        if (nodes[j].last_use == i && j != output_id) nodes[j].out.release();
    }
  }
  return nodes[output_id].out;
}

void Network::backward(const Tensor& grad_out) {
  if (nodes[output_id].out.size() == 0)
    throw ConfigError("backward: run a train-mode forward first");
  if (!grad_out.same_shape(nodes[output_id].out))
    throw ShapeError("backward: gradient shape mismatch");
  for (Node& nd : nodes) nd.gout = Tensor{};
  nodes[output_id].gout = grad_out;

  auto gslot = [this](int id) -> Tensor& {
    Node& n = nodes[id];
    if (n.gout.size() == 0)
      n.gout = Tensor(n.out.n, n.out.c, n.out.h, n.out.w);
    return n.gout;
  };

  for (int i = int(nodes.size()) - 1; i >= 0; --i) {
    Node& nd = nodes[i];
    if (nd.gout.size() == 0) continue;  // not on the loss path
    switch (nd.kind) {
      case OpKind::Input:
        break;
      case OpKind::Conv: {
        Tensor gx, gw, gb;
        conv2d_backward(nd.gout, nodes[nd.inputs[0]].out, nd.weight, nd.stride,
                        nd.pad, gx, gw, gb);
        add_into(gslot(nd.inputs[0]), gx);
        add_grad(nd.weight, gw);
        add_grad(nd.bias, gb);
        break;
      }
      case OpKind::TConv: {
        Tensor gx, gw, gb;
        conv2d_transpose_backward(nd.gout, nodes[nd.inputs[0]].out, nd.weight,
                                  nd.stride, gx, gw, gb);
        add_into(gslot(nd.inputs[0]), gx);
        add_grad(nd.weight, gw);
        add_grad(nd.bias, gb);
        break;
      }
      case OpKind::BatchNorm: {
        Tensor gx, gg, gb;
        batch_norm_backward(nd.gout, nd.bn_cache, nd.gamma, gx, gg, gb);
        add_into(gslot(nd.inputs[0]), gx);
        add_grad(nd.gamma, gg);
        add_grad(nd.beta, gb);
        break;
      }
      case OpKind::ReLU:
        add_into(gslot(nd.inputs[0]), relu_backward(nd.gout, nd.out));
        break;
      case OpKind::Sigmoid:
        add_into(gslot(nd.inputs[0]), sigmoid_backward(nd.gout, nd.out));
        break;
      case OpKind::MaxPool:
        add_into(gslot(nd.inputs[0]),
                 max_pool2_backward(nd.gout, nd.pool_argmax, nd.pool_in[0],
                                    nd.pool_in[1], nd.pool_in[2],
                                    nd.pool_in[3]));
        break;
      case OpKind::Concat: {
        Tensor ga, gb;
        concat_channels_backward(nd.gout, nd.concat_a_channels, ga, gb);
        add_into(gslot(nd.inputs[0]), ga);
        add_into(gslot(nd.inputs[1]), gb);
        break;
      }
      case OpKind::Add:
        add_into(gslot(nd.inputs[0]), nd.gout);
        add_into(gslot(nd.inputs[1]), nd.gout);
        break;
    }
    if (i != input_id) nd.gout.release();
  }
}

std::vector<Tensor*> Network::parameters() {
  std::vector<Tensor*> out;
  for (Node& nd : nodes) {
    if (nd.kind == OpKind::Conv || nd.kind == OpKind::TConv) {
      out.push_back(&nd.weight);
      out.push_back(&nd.bias);
    } else if (nd.kind == OpKind::BatchNorm) {
      out.push_back(&nd.gamma);
      out.push_back(&nd.beta);
    }
  }
  return out;
}

void Network::zero_param_grads() {
  for (Tensor* t : parameters()) {
    t->ensure_grad();
    t->zero_grad();
  }
}

long long Network::param_count() const {
  long long total = 0;
  for (const Node& nd : nodes) {
    if (nd.kind == OpKind::Conv || nd.kind == OpKind::TConv)
      total += (long long)(nd.weight.size() + nd.bias.size());
    else if (nd.kind == OpKind::BatchNorm)
      total += (long long)(nd.gamma.size() + nd.beta.size());
  }
  return total;
}

void Network::init_params(uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (Node& nd : nodes) {
    if (nd.kind == OpKind::Conv || nd.kind == OpKind::TConv) {
      // Fan-in on the input side of the layer.
      const int fan_in = (nd.kind == OpKind::Conv ? nd.weight.c : nd.weight.n) *
                         nd.weight.h * nd.weight.w;
      const double stddev = std::sqrt(2.0 / double(fan_in));
      nd.weight = Tensor::randn(nd.weight.n, nd.weight.c, nd.weight.h,
                                nd.weight.w, stddev, rng);
      std::fill(nd.bias.data.begin(), nd.bias.data.end(), 0.0);
    } else if (nd.kind == OpKind::BatchNorm) {
      std::fill(nd.gamma.data.begin(), nd.gamma.data.end(), 1.0);
      std::fill(nd.beta.data.begin(), nd.beta.data.end(), 0.0);
      std::fill(nd.running_mean.begin(), nd.running_mean.end(), 0.0);
      std::fill(nd.running_var.begin(), nd.running_var.end(), 1.0);
    }
  }
}

double Network::train_step(const Tensor& x, const Tensor& target,
                           AdamState& opt) {
  Tensor p = forward(x, RunMode::Train);
  const double loss = bce_loss(p, target);
  Tensor g = bce_loss_backward(p, target);
  zero_param_grads();
  backward(g);
  adam_step(opt, parameters());
  return loss;
}

// -------------------------------------------------------------- conversions

Tensor image_to_tensor(const RgbImage& image) {
  Tensor t(1, 3, image.height, image.width);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      const Rgb p = image.at(x, y);
      t.at(0, 0, y, x) = p.r / 255.0;
      t.at(0, 1, y, x) = p.g / 255.0;
      t.at(0, 2, y, x) = p.b / 255.0;
    }
  return t;
}

Tensor mask_to_target(const LabelMap& mask, const ClassConfig& config) {
  const std::vector<BinaryMap> channels = to_channels(mask, config);
  Tensor t(1, int(channels.size()), mask.height, mask.width);
  for (int c = 0; c < int(channels.size()); ++c)
    for (int y = 0; y < mask.height; ++y)
      for (int x = 0; x < mask.width; ++x)
        t.at(0, c, y, x) = channels[c].at(x, y) ? 1.0 : 0.0;
  return t;
}

std::vector<RealMap> tensor_to_realmaps(const Tensor& t, int batch_index) {
  if (batch_index < 0 || batch_index >= t.n)
    throw ShapeError("tensor_to_realmaps: batch index out of range");
  std::vector<RealMap> out;
  out.reserve(size_t(t.c));
  for (int c = 0; c < t.c; ++c) {
    RealMap m(t.w, t.h);
    const double* src = &t.data[t.idx(batch_index, c, 0, 0)];
    std::copy_n(src, m.data.size(), m.data.begin());
    out.push_back(std::move(m));
  }
  return out;
}

// ---------------------------------------------------------------- training

FitHistory fit(Network& net, const std::vector<TrainSample>& data,
               const ClassConfig& config, const FitOptions& opts) {
  if (data.empty()) throw ConfigError("fit: empty dataset");
  if (opts.batch_size < 1) throw ConfigError("fit: batch size must be >= 1");
  if (opts.epochs < 0) throw ConfigError("fit: negative epoch count");
  if (opts.val_fraction < 0.0 || opts.val_fraction >= 1.0)
    throw ConfigError("fit: val_fraction must be in [0, 1)");

  const int width = data[0].image.width, height = data[0].image.height;
  for (const TrainSample& s : data)
    if (s.image.width != width || s.image.height != height ||
        s.mask.width != width || s.mask.height != height)
      throw ShapeError("fit: samples must share one resolution");

  const size_t n_val = size_t(opts.val_fraction * double(data.size()));
  const size_t n_train = data.size() - n_val;
  if (n_train == 0 && opts.epochs > 0)
    throw ConfigError("fit: no training samples left after split");

  // Validation tensors are fixed (never augmented).
  std::vector<std::pair<Tensor, Tensor>> val;
  for (size_t i = n_train; i < data.size(); ++i)
    val.emplace_back(image_to_tensor(data[i].image),
                     mask_to_target(data[i].mask, config));

  AdamState opt(opts.adam);
  std::mt19937_64 aug_rng(opts.aug.seed);
  FitHistory hist;

  std::vector<size_t> order(n_train);
  std::iota(order.begin(), order.end(), size_t(0));

  const int target_channels = config.output_channels;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    std::mt19937_64 shuffle_rng(opts.shuffle_seed + uint64_t(epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    size_t seen = 0;
    for (size_t start = 0; start < n_train; start += size_t(opts.batch_size)) {
      const size_t bn = std::min(size_t(opts.batch_size), n_train - start);
      Tensor bx(int(bn), 3, height, width);
      Tensor by(int(bn), target_channels, height, width);
      const size_t x_plane = size_t(3) * height * width;
      const size_t y_plane = size_t(target_channels) * height * width;
      for (size_t b = 0; b < bn; ++b) {
        const TrainSample& s = data[order[start + b]];
        Tensor xs, ys;
        if (opts.augment) {
          const AffineTransform t = sample_transform(opts.aug, aug_rng);
          auto [img, msk] = apply_pair(s.image, s.mask, t);
          xs = image_to_tensor(img);
          ys = mask_to_target(msk, config);
        } else {
          xs = image_to_tensor(s.image);
          ys = mask_to_target(s.mask, config);
        }
        std::copy_n(xs.data.begin(), x_plane, bx.data.begin() + b * x_plane);
        std::copy_n(ys.data.begin(), y_plane, by.data.begin() + b * y_plane);
      }
      const double loss = net.train_step(bx, by, opt);
      loss_sum += loss * double(bn);
      seen += bn;
    }
    hist.train_loss.push_back(loss_sum / double(seen));

    if (!val.empty()) {
      double v_sum = 0.0;
      for (const auto& [vx, vy] : val) {
        Tensor p = net.forward(vx, RunMode::Infer);
        v_sum += bce_loss(p, vy);
      }
      hist.val_loss.push_back(v_sum / double(val.size()));
    }
  }
  return hist;
}

}  // namespace suim::nn
