#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "suimkit/adam.hpp"
#include "suimkit/augment.hpp"
#include "suimkit/ops.hpp"
#include "suimkit/palette.hpp"
#include "suimkit/tensor.hpp"
#include "suimkit/types.hpp"

namespace suim::nn {

enum class OpKind {
  Input,
  Conv,
  TConv,
  BatchNorm,
  ReLU,
  Sigmoid,
  MaxPool,
  Concat,
  Add,
};

struct Node {
  OpKind kind = OpKind::Input;
  std::string name;
  std::vector<int> inputs;

  // Layer parameters (which subset is used depends on kind).
  Tensor weight, bias;    // conv: (Cout,Cin,kh,kw); tconv: (Cin,Cout,kh,kw)
  Tensor gamma, beta;     // batch norm scale/offset, shape (C,1,1,1)
  std::vector<double> running_mean, running_var;
  int stride = 1, pad = 0;

  // Runtime state.
  Tensor out;
  Tensor gout;
  BnCache bn_cache;
  std::vector<int> pool_argmax;
  int pool_in[4] = {0, 0, 0, 0};
  int concat_a_channels = 0;
  int last_use = -1;  // highest node id consuming this output (-1: none)
};

// Encoder/decoder widths for the residual variant. The encoder is a
// 5x5+3x3 stem followed by two stages of bottleneck residual blocks
// (1x1 -> 3x3 -> 1x1, halved width inside); block counts must sum to 7.
struct RsbConfig {
  int stem_filters = 64;
  std::array<int, 2> stage_filters{128, 256};
  std::array<int, 2> stage_blocks{3, 4};
  std::array<int, 3> decoder_filters{448, 256, 128};
  std::array<int, 3> up_filters{256, 128, 64};
};

// Widths for the VGG-16 style variant: four conv blocks with 2-2-3-3
// layers and a pool after each, then the mirrored decoder.
struct VggConfig {
  std::array<int, 4> block_filters{64, 128, 256, 512};
  std::array<int, 3> decoder_filters{384, 256, 128};
  std::array<int, 3> up_filters{256, 128, 64};
  int final_filters = 64;
};

struct NetworkSpec {
  std::string variant = "rsb";  // "rsb" | "vgg"
  int width = 320, height = 240;
  int in_channels = 3;
  int out_channels = 5;
  uint64_t seed = 1;
  RsbConfig rsb;
  VggConfig vgg;

  std::string to_json() const;
  static NetworkSpec from_json(const std::string& text);
};

// Reference configuration for a variant at its native resolution
// (320x240 for "rsb", 320x256 for "vgg").
NetworkSpec reference_spec(const std::string& variant);

enum class RunMode { Train, Infer };

struct Network {
  NetworkSpec spec;
  std::vector<Node> nodes;
  int input_id = -1;
  int output_id = -1;
  // Set by build_network: forward then rejects inputs whose shape differs
  // from the configured resolution. Hand-assembled graphs stay unchecked.
  bool enforce_input_shape = false;

  // Runs the graph in topological order. Train mode keeps every
  // activation for backward; infer mode uses running batch-norm stats
  // and frees activations as soon as their last consumer has run.
  Tensor forward(const Tensor& x, RunMode mode);

  // Propagates d(loss)/d(output) back through the graph recorded by the
  // last train-mode forward, accumulating into parameter .grad slots.
  void backward(const Tensor& grad_out);

  std::vector<Tensor*> parameters();
  void zero_param_grads();
  long long param_count() const;  // trainable only (no running stats)

  // Deterministic initialization: conv/tconv weights ~ N(0, sqrt(2/fan_in)),
  // biases 0, batch-norm gamma 1 / beta 0, running stats 0/1.
  void init_params(uint64_t seed);

  // Forward + pixelwise binary cross entropy + backward + one Adam
  // update. Returns the loss at the pre-update parameters.
  double train_step(const Tensor& x, const Tensor& target, AdamState& opt);
};

class GraphBuilder {
 public:
  int input(int channels, std::string name = "input");
  int conv(int from, int filters, int k, int stride, int pad,
           std::string name = "");
  int tconv(int from, int filters, int k, int stride, std::string name = "");
  int batch_norm(int from, std::string name = "");
  int relu(int from, std::string name = "");
  int sigmoid(int from, std::string name = "");
  int max_pool(int from, std::string name = "");
  int concat(int a, int b, std::string name = "");
  int add(int a, int b, std::string name = "");

  int channels_of(int id) const;
  Network finish(int output_id, NetworkSpec spec = {});

 private:
  int check(int id) const;
  int push(Node node, int channels);

  std::vector<Node> nodes_;
  std::vector<int> channels_;
};

enum class SkipPath { Auto, Identity, Projection };

// Bottleneck residual block: 1x1 (filters/2, given stride) -> 3x3 ->
// 1x1 (filters), each conv followed by batch norm, ReLU after the first
// two and after the residual add. The skip is the identity when shapes
// allow, otherwise a strided 1x1 projection with batch norm.
int rsb_block(GraphBuilder& g, int from, int filters, int stride,
              SkipPath skip = SkipPath::Auto, const std::string& label = "rsb");

// Builds the graph for spec.variant and runs init_params(spec.seed).
Network build_network(const NetworkSpec& spec);

// Conversions between image-space structures and NCHW tensors.
Tensor image_to_tensor(const RgbImage& image);                 // (1,3,H,W)/255
Tensor mask_to_target(const LabelMap& mask, const ClassConfig& config);
std::vector<RealMap> tensor_to_realmaps(const Tensor& t, int batch_index);

struct TrainSample {
  RgbImage image;
  LabelMap mask;
  std::string stem;
};

struct FitOptions {
  int epochs = 1;
  int batch_size = 2;
  double val_fraction = 0.0;
  bool augment = false;
  AugmentParams aug;
  uint64_t shuffle_seed = 1;
  AdamConfig adam;
};

struct FitHistory {
  std::vector<double> train_loss;  // per epoch, sample-weighted mean
  std::vector<double> val_loss;    // empty when val_fraction == 0
};

// Mini-batch training over in-memory pairs. The validation split is the
// trailing fraction of `data` (held fixed); the train portion is
// reshuffled each epoch from shuffle_seed + epoch. Validation runs in
// infer mode.
FitHistory fit(Network& net, const std::vector<TrainSample>& data,
               const ClassConfig& config, const FitOptions& opts);

}  // namespace suim::nn
