#include "suimkit/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "suimkit/types.hpp"

namespace suim::nn {

double max_rel_grad_error(const std::function<double()>& loss,
                          std::span<double> x, std::span<const double> analytic,
                          const GradCheckOptions& opts) {
  if (x.size() != analytic.size())
    throw ShapeError("grad check: analytic size mismatch");

  std::vector<size_t> coords(x.size());
  std::iota(coords.begin(), coords.end(), size_t(0));
  if (opts.max_coords > 0 && coords.size() > size_t(opts.max_coords)) {
    std::mt19937_64 rng(opts.seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(size_t(opts.max_coords));
    std::sort(coords.begin(), coords.end());
  }

  double worst = 0.0;
  for (size_t i : coords) {
    const double saved = x[i];
    x[i] = saved + opts.h;
    const double up = loss();
    x[i] = saved - opts.h;
    const double down = loss();
    x[i] = saved;
    const double fd = (up - down) / (2.0 * opts.h);
    const double an = analytic[i];
    const double denom = std::max({std::fabs(fd), std::fabs(an), 1e-4});
    worst = std::max(worst, std::fabs(fd - an) / denom);
  }
  return worst;
}

}  // namespace suim::nn
