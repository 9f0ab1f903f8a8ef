#include "suimkit/adam.hpp"

#include <cmath>

#include "suimkit/types.hpp"

namespace suim::nn {

void adam_step(AdamState& state, const std::vector<Tensor*>& params) {
  if (state.m.empty()) {
    state.m.resize(params.size());
    state.v.resize(params.size());
  }
  if (state.m.size() != params.size())
    throw ConfigError("adam_step: parameter count changed between steps");

  ++state.step;
  const AdamConfig& c = state.config;
  const double bc1 = 1.0 - std::pow(c.beta1, double(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, double(state.step));

  for (size_t p = 0; p < params.size(); ++p) {
    Tensor& t = *params[p];
    if (t.grad.size() != t.data.size())
      throw ConfigError("adam_step: parameter has no gradient");
    if (state.m[p].size() != t.data.size()) {
      state.m[p].assign(t.data.size(), 0.0);
      state.v[p].assign(t.data.size(), 0.0);
    }
    std::vector<double>& m = state.m[p];
    std::vector<double>& v = state.v[p];
    for (size_t i = 0; i < t.data.size(); ++i) {
      const double g = t.grad[i];
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      t.data[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
    }
  }
}

}  // namespace suim::nn
