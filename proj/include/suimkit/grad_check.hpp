#pragma once

#include <cstdint>
#include <functional>
#include <span>

namespace suim::nn {

struct GradCheckOptions {
  double h = 1e-5;        // central-difference step
  int max_coords = 0;     // 0 = check every coordinate
  uint64_t seed = 1;      // coordinate subsampling seed
};

// Compares an analytic gradient against central differences of `loss`
// taken over the buffer `x` (perturbed in place and restored). Returns
// the worst relative error max|fd - an| / max(|fd|, |an|, 1e-4).
double max_rel_grad_error(const std::function<double()>& loss,
                          std::span<double> x, std::span<const double> analytic,
                          const GradCheckOptions& opts = {});

}  // namespace suim::nn
