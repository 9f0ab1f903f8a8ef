#pragma once

#include <vector>

#include "suimkit/tensor.hpp"

namespace suim::nn {

// Adam with bias correction. Defaults follow the training setup used for
// the segmentation nets: a low first-moment decay with the usual second
// moment and epsilon.
struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  long long step = 0;
  // One m/v slot pair per parameter tensor, sized lazily on first step.
  std::vector<std::vector<double>> m, v;

  explicit AdamState(AdamConfig cfg = {}) : config(cfg) {}
};

// Applies one update to every parameter from its .grad. Parameter list
// order must stay stable across steps (state slots are positional).
void adam_step(AdamState& state, const std::vector<Tensor*>& params);

}  // namespace suim::nn
