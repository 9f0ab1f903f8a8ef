#pragma once

#include <algorithm>
#include <cstddef>
#include <random>
#include <vector>

#include "suimkit/types.hpp"

namespace suim {

// Dense N x C x H x W array with an optional same-shape gradient slot.
// Double precision throughout; layout is row-major NCHW.
struct Tensor {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<double> data;
  std::vector<double> grad;  // empty until ensure_grad()

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_)
      : n(n_), c(c_), h(h_), w(w_), data(size_t(n_) * c_ * h_ * w_, 0.0) {}

  size_t size() const { return data.size(); }
  bool same_shape(const Tensor& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }

  size_t idx(int in, int ic, int iy, int ix) const {
    return ((size_t(in) * c + ic) * h + iy) * w + ix;
  }
  double& at(int in, int ic, int iy, int ix) { return data[idx(in, ic, iy, ix)]; }
  double at(int in, int ic, int iy, int ix) const {
    return data[idx(in, ic, iy, ix)];
  }

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  }
  void zero_grad() {
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
  }
  void release() {
    data.clear();
    data.shrink_to_fit();
    grad.clear();
    grad.shrink_to_fit();
  }

  static Tensor zeros(int n, int c, int h, int w) { return Tensor(n, c, h, w); }
  static Tensor full(int n, int c, int h, int w, double v) {
    Tensor t(n, c, h, w);
    std::fill(t.data.begin(), t.data.end(), v);
    return t;
  }
  static Tensor randn(int n, int c, int h, int w, double stddev,
                      std::mt19937_64& rng) {
    Tensor t(n, c, h, w);
    std::normal_distribution<double> dist(0.0, stddev);
    for (double& v : t.data) v = dist(rng);
    return t;
  }
};

}  // namespace suim
