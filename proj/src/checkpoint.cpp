#include "suimkit/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <vector>

namespace suim::nn {

namespace {

constexpr char kMagic[8] = {'S', 'U', 'I', 'M', 'C', 'K', 'P', 'T'};
constexpr uint8_t kDtypeF64 = 0;

void put_u32(std::string& out, uint32_t v) {
  out.push_back(char(v & 0xff));
  out.push_back(char((v >> 8) & 0xff));
  out.push_back(char((v >> 16) & 0xff));
  out.push_back(char((v >> 24) & 0xff));
}

void put_doubles(std::string& out, const double* p, size_t count) {
  const size_t bytes = count * sizeof(double);
  const size_t at = out.size();
  out.resize(at + bytes);
  std::memcpy(out.data() + at, p, bytes);
}

void put_record(std::string& out, const std::string& name,
                const std::vector<uint32_t>& dims, const double* p,
                size_t count) {
  put_u32(out, uint32_t(name.size()));
  out.append(name);
  out.push_back(char(kDtypeF64));
  out.push_back(char(uint8_t(dims.size())));
  for (uint32_t d : dims) put_u32(out, d);
  put_doubles(out, p, count);
}

struct Cursor {
  const std::string& buf;
  size_t at = 0;

  void need(size_t n) const {
    if (at + n > buf.size()) throw IoError("checkpoint: truncated file");
  }
  uint32_t u32() {
    need(4);
    const auto* p = reinterpret_cast<const unsigned char*>(buf.data() + at);
    at += 4;
    return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
           uint32_t(p[3]) << 24;
  }
  uint8_t u8() {
    need(1);
    return uint8_t(buf[at++]);
  }
  std::string bytes(size_t n) {
    need(n);
    std::string s = buf.substr(at, n);
    at += n;
    return s;
  }
  void doubles(double* dst, size_t count) {
    const size_t n = count * sizeof(double);
    need(n);
    std::memcpy(dst, buf.data() + at, n);
    at += n;
  }
};

std::vector<uint32_t> tensor_dims(const Tensor& t) {
  return {uint32_t(t.n), uint32_t(t.c), uint32_t(t.h), uint32_t(t.w)};
}

}  // namespace

void save_checkpoint(const std::string& path, const Network& net) {
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put_u32(out, kCheckpointVersion);

  const std::string spec_json = net.spec.to_json();
  put_u32(out, uint32_t(spec_json.size()));
  out.append(spec_json);

  std::string body;
  uint32_t n_records = 0;
  for (size_t i = 0; i < net.nodes.size(); ++i) {
    const Node& nd = net.nodes[i];
    const std::string base = "n" + std::to_string(i) + ".";
    if (nd.kind == OpKind::Conv || nd.kind == OpKind::TConv) {
      put_record(body, base + "weight", tensor_dims(nd.weight),
                 nd.weight.data.data(), nd.weight.size());
      put_record(body, base + "bias", tensor_dims(nd.bias),
                 nd.bias.data.data(), nd.bias.size());
      n_records += 2;
    } else if (nd.kind == OpKind::BatchNorm) {
      put_record(body, base + "gamma", tensor_dims(nd.gamma),
                 nd.gamma.data.data(), nd.gamma.size());
      put_record(body, base + "beta", tensor_dims(nd.beta),
                 nd.beta.data.data(), nd.beta.size());
      put_record(body, base + "running_mean",
                 {uint32_t(nd.running_mean.size())}, nd.running_mean.data(),
                 nd.running_mean.size());
      put_record(body, base + "running_var", {uint32_t(nd.running_var.size())},
                 nd.running_var.data(), nd.running_var.size());
      n_records += 4;
    }
  }
  put_u32(out, n_records);
  out.append(body);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write checkpoint: " + path);
  f.write(out.data(), std::streamsize(out.size()));
  if (!f) throw IoError("cannot write checkpoint: " + path);
}

Network load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint: " + path);
  std::string buf((std::istreambuf_iterator<char>(f)),
                  std::istreambuf_iterator<char>());

  Cursor cur{buf};
  const std::string magic = cur.bytes(sizeof(kMagic));
  if (std::memcmp(magic.data(), kMagic, sizeof(kMagic)) != 0)
    throw IoError("checkpoint: bad magic");
  const uint32_t version = cur.u32();
  if (version != kCheckpointVersion)
    throw IoError("checkpoint: unsupported version " + std::to_string(version));

  const uint32_t spec_len = cur.u32();
  const std::string spec_json = cur.bytes(spec_len);
  NetworkSpec spec;
  try {
    spec = NetworkSpec::from_json(spec_json);
  } catch (const ConfigError& e) {
    throw IoError(std::string("checkpoint: bad embedded spec: ") + e.what());
  }
  Network net = build_network(spec);

  const uint32_t n_records = cur.u32();
  size_t expected = 0;
  for (const Node& nd : net.nodes) {
    if (nd.kind == OpKind::Conv || nd.kind == OpKind::TConv) expected += 2;
    if (nd.kind == OpKind::BatchNorm) expected += 4;
  }
  if (n_records != expected)
    throw IoError("checkpoint: record count mismatch");

  for (uint32_t rec = 0; rec < n_records; ++rec) {
    const uint32_t name_len = cur.u32();
    const std::string name = cur.bytes(name_len);
    const uint8_t dtype = cur.u8();
    if (dtype != kDtypeF64)
      throw IoError("checkpoint: unsupported dtype in " + name);
    const uint8_t ndim = cur.u8();
    std::vector<uint32_t> dims(ndim);
    size_t count = 1;
    for (uint8_t d = 0; d < ndim; ++d) {
      dims[d] = cur.u32();
      count *= dims[d];
    }

    const size_t dot = name.find('.');
    size_t node_id = size_t(-1);
    if (name.size() > 2 && name[0] == 'n' && dot != std::string::npos) {
      try {
        node_id = std::stoul(name.substr(1, dot - 1));
      } catch (...) {
      }
    }
    if (node_id >= net.nodes.size())
      throw IoError("checkpoint: unknown record " + name);
    Node& nd = net.nodes[node_id];
    const std::string slot = name.substr(dot + 1);

    auto load_tensor = [&](Tensor& t) {
      if (ndim != 4 || tensor_dims(t) != dims)
        throw IoError("checkpoint: shape mismatch for " + name);
      cur.doubles(t.data.data(), t.size());
    };
    auto load_vec = [&](std::vector<double>& v) {
      if (ndim != 1 || dims[0] != v.size())
        throw IoError("checkpoint: shape mismatch for " + name);
      cur.doubles(v.data(), v.size());
    };

    const bool is_conv = nd.kind == OpKind::Conv || nd.kind == OpKind::TConv;
    const bool is_bn = nd.kind == OpKind::BatchNorm;
    if (slot == "weight" && is_conv)
      load_tensor(nd.weight);
    else if (slot == "bias" && is_conv)
      load_tensor(nd.bias);
    else if (slot == "gamma" && is_bn)
      load_tensor(nd.gamma);
    else if (slot == "beta" && is_bn)
      load_tensor(nd.beta);
    else if (slot == "running_mean" && is_bn)
      load_vec(nd.running_mean);
    else if (slot == "running_var" && is_bn)
      load_vec(nd.running_var);
    else
      throw IoError("checkpoint: unknown record " + name);
  }
  if (cur.at != buf.size()) throw IoError("checkpoint: trailing data");
  return net;
}

}  // namespace suim::nn
