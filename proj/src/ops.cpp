#include "suimkit/ops.hpp"

#include <algorithm>
#include <cmath>

namespace suim::nn {

namespace {

inline int div_ceil_pos(int a, int b) { return a > 0 ? (a + b - 1) / b : 0; }

// Valid output range [lo, hi) so that o*stride - pad + k stays inside
// [0, limit).
inline void valid_out_range(int k, int pad, int stride, int limit, int out_dim,
                            int& lo, int& hi) {
  lo = div_ceil_pos(pad - k, stride);
  int t = limit + pad - k;  // o*stride <= t-1
  hi = t <= 0 ? 0 : std::min(out_dim, (t - 1) / stride + 1);
  if (lo > hi) lo = hi;
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, int stride,
              int pad) {
  if (w.c != x.c) throw ShapeError("conv2d: input/weight channel mismatch");
  if (stride < 1) throw ShapeError("conv2d: stride must be >= 1");
  if (int(bias.size()) != w.n) throw ShapeError("conv2d: bias size mismatch");
  const int kh = w.h, kw = w.w;
  const int num = x.h + 2 * pad - kh;
  const int numw = x.w + 2 * pad - kw;
  if (num < 0 || numw < 0)
    throw ShapeError("conv2d: kernel larger than padded input");
  const int oh = num / stride + 1;
  const int ow = numw / stride + 1;

  Tensor out(x.n, w.n, oh, ow);
  for (int in = 0; in < x.n; ++in) {
    for (int co = 0; co < w.n; ++co) {
      double* oplane = &out.data[out.idx(in, co, 0, 0)];
      std::fill(oplane, oplane + size_t(oh) * ow, bias.data[co]);
      for (int ci = 0; ci < x.c; ++ci) {
        for (int ky = 0; ky < kh; ++ky) {
          int oy_lo, oy_hi;
          valid_out_range(ky, pad, stride, x.h, oh, oy_lo, oy_hi);
          const double* wrow = &w.data[w.idx(co, ci, ky, 0)];
          for (int oy = oy_lo; oy < oy_hi; ++oy) {
            const int iy = oy * stride - pad + ky;
            const double* xrow = &x.data[x.idx(in, ci, iy, 0)];
            double* orow = oplane + size_t(oy) * ow;
            for (int kx = 0; kx < kw; ++kx) {
              int ox_lo, ox_hi;
              valid_out_range(kx, pad, stride, x.w, ow, ox_lo, ox_hi);
              const double wv = wrow[kx];
              const int shift = kx - pad;
              for (int ox = ox_lo; ox < ox_hi; ++ox)
                orow[ox] += wv * xrow[ox * stride + shift];
            }
          }
        }
      }
    }
  }
  return out;
}

void conv2d_backward(const Tensor& gout, const Tensor& x, const Tensor& w,
                     int stride, int pad, Tensor& gx, Tensor& gw, Tensor& gb) {
  const int kh = w.h, kw = w.w;
  const int oh = gout.h, ow = gout.w;
  if (gout.n != x.n || gout.c != w.n)
    throw ShapeError("conv2d_backward: gradient shape mismatch");
  gx = Tensor(x.n, x.c, x.h, x.w);
  gw = Tensor(w.n, w.c, w.h, w.w);
  gb = Tensor(w.n, 1, 1, 1);

  for (int in = 0; in < x.n; ++in) {
    for (int co = 0; co < w.n; ++co) {
      const double* gplane = &gout.data[gout.idx(in, co, 0, 0)];
      double acc_b = 0.0;
      for (size_t i = 0; i < size_t(oh) * ow; ++i) acc_b += gplane[i];
      gb.data[co] += acc_b;
      for (int ci = 0; ci < x.c; ++ci) {
        for (int ky = 0; ky < kh; ++ky) {
          int oy_lo, oy_hi;
          valid_out_range(ky, pad, stride, x.h, oh, oy_lo, oy_hi);
          const double* wrow = &w.data[w.idx(co, ci, ky, 0)];
          double* gwrow = &gw.data[gw.idx(co, ci, ky, 0)];
          for (int oy = oy_lo; oy < oy_hi; ++oy) {
            const int iy = oy * stride - pad + ky;
            const double* xrow = &x.data[x.idx(in, ci, iy, 0)];
            double* gxrow = &gx.data[gx.idx(in, ci, iy, 0)];
            const double* grow = gplane + size_t(oy) * ow;
            for (int kx = 0; kx < kw; ++kx) {
              int ox_lo, ox_hi;
              valid_out_range(kx, pad, stride, x.w, ow, ox_lo, ox_hi);
              const double wv = wrow[kx];
              const int shift = kx - pad;
              double acc_w = 0.0;
              for (int ox = ox_lo; ox < ox_hi; ++ox) {
                const double g = grow[ox];
                acc_w += g * xrow[ox * stride + shift];
                gxrow[ox * stride + shift] += wv * g;
              }
              gwrow[kx] += acc_w;
            }
          }
        }
      }
    }
  }
}

Tensor conv2d_transpose(const Tensor& x, const Tensor& w, const Tensor& bias,
                        int stride) {
  if (w.n != x.c)
    throw ShapeError("conv2d_transpose: input/weight channel mismatch");
  if (stride < 1) throw ShapeError("conv2d_transpose: stride must be >= 1");
  const int cout = w.c, kh = w.h, kw = w.w;
  if (int(bias.size()) != cout)
    throw ShapeError("conv2d_transpose: bias size mismatch");
  const int oh = (x.h - 1) * stride + kh;
  const int ow = (x.w - 1) * stride + kw;

  Tensor out(x.n, cout, oh, ow);
  for (int in = 0; in < x.n; ++in) {
    for (int co = 0; co < cout; ++co) {
      double* oplane = &out.data[out.idx(in, co, 0, 0)];
      std::fill(oplane, oplane + size_t(oh) * ow, bias.data[co]);
    }
    for (int ci = 0; ci < x.c; ++ci) {
      const double* xplane = &x.data[x.idx(in, ci, 0, 0)];
      for (int co = 0; co < cout; ++co) {
        double* oplane = &out.data[out.idx(in, co, 0, 0)];
        for (int y = 0; y < x.h; ++y) {
          for (int ky = 0; ky < kh; ++ky) {
            double* orow = oplane + size_t(y * stride + ky) * ow;
            const double* wrow = &w.data[w.idx(ci, co, ky, 0)];
            const double* xrow = xplane + size_t(y) * x.w;
            for (int xcol = 0; xcol < x.w; ++xcol) {
              const double v = xrow[xcol];
              double* dst = orow + size_t(xcol) * stride;
              for (int kx = 0; kx < kw; ++kx) dst[kx] += v * wrow[kx];
            }
          }
        }
      }
    }
  }
  return out;
}

void conv2d_transpose_backward(const Tensor& gout, const Tensor& x,
                               const Tensor& w, int stride, Tensor& gx,
                               Tensor& gw, Tensor& gb) {
  const int cout = w.c, kh = w.h, kw = w.w;
  if (gout.n != x.n || gout.c != cout)
    throw ShapeError("conv2d_transpose_backward: gradient shape mismatch");
  gx = Tensor(x.n, x.c, x.h, x.w);
  gw = Tensor(w.n, w.c, w.h, w.w);
  gb = Tensor(cout, 1, 1, 1);

  for (int in = 0; in < x.n; ++in) {
    for (int co = 0; co < cout; ++co) {
      const double* gplane = &gout.data[gout.idx(in, co, 0, 0)];
      double acc = 0.0;
      for (size_t i = 0; i < size_t(gout.h) * gout.w; ++i) acc += gplane[i];
      gb.data[co] += acc;
    }
    for (int ci = 0; ci < x.c; ++ci) {
      const double* xplane = &x.data[x.idx(in, ci, 0, 0)];
      double* gxplane = &gx.data[gx.idx(in, ci, 0, 0)];
      for (int co = 0; co < cout; ++co) {
        const double* gplane = &gout.data[gout.idx(in, co, 0, 0)];
        for (int y = 0; y < x.h; ++y) {
          for (int ky = 0; ky < kh; ++ky) {
            const double* grow = gplane + size_t(y * stride + ky) * gout.w;
            const double* wrow = &w.data[w.idx(ci, co, ky, 0)];
            double* gwrow = &gw.data[gw.idx(ci, co, ky, 0)];
            const double* xrow = xplane + size_t(y) * x.w;
            double* gxrow = gxplane + size_t(y) * x.w;
            for (int xcol = 0; xcol < x.w; ++xcol) {
              const double* gdst = grow + size_t(xcol) * stride;
              const double xv = xrow[xcol];
              double acc_x = 0.0;
              for (int kx = 0; kx < kw; ++kx) {
                acc_x += gdst[kx] * wrow[kx];
                gwrow[kx] += gdst[kx] * xv;
              }
              gxrow[xcol] += acc_x;
            }
          }
        }
      }
    }
  }
}

Tensor batch_norm_train(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                        std::vector<double>& running_mean,
                        std::vector<double>& running_var, double momentum,
                        double eps, BnCache& cache) {
  if (int(gamma.size()) != x.c || int(beta.size()) != x.c)
    throw ShapeError("batch_norm: parameter channel mismatch");
  const size_t plane = size_t(x.h) * x.w;
  const double m = double(x.n) * plane;
  cache.mean.assign(x.c, 0.0);
  cache.inv_std.assign(x.c, 0.0);
  cache.xhat = Tensor(x.n, x.c, x.h, x.w);
  Tensor out(x.n, x.c, x.h, x.w);

  for (int c = 0; c < x.c; ++c) {
    double sum = 0.0;
    for (int in = 0; in < x.n; ++in) {
      const double* p = &x.data[x.idx(in, c, 0, 0)];
      for (size_t i = 0; i < plane; ++i) sum += p[i];
    }
    const double mean = sum / m;
    double var_acc = 0.0;
    for (int in = 0; in < x.n; ++in) {
      const double* p = &x.data[x.idx(in, c, 0, 0)];
      for (size_t i = 0; i < plane; ++i) {
        double d = p[i] - mean;
        var_acc += d * d;
      }
    }
    const double var = var_acc / m;  // biased
    const double inv_std = 1.0 / std::sqrt(var + eps);
    cache.mean[c] = mean;
    cache.inv_std[c] = inv_std;
    running_mean[c] = momentum * running_mean[c] + (1.0 - momentum) * mean;
    running_var[c] = momentum * running_var[c] + (1.0 - momentum) * var;

    const double g = gamma.data[c], b = beta.data[c];
    for (int in = 0; in < x.n; ++in) {
      const double* p = &x.data[x.idx(in, c, 0, 0)];
      double* xh = &cache.xhat.data[cache.xhat.idx(in, c, 0, 0)];
      double* o = &out.data[out.idx(in, c, 0, 0)];
      for (size_t i = 0; i < plane; ++i) {
        xh[i] = (p[i] - mean) * inv_std;
        o[i] = g * xh[i] + b;
      }
    }
  }
  return out;
}

Tensor batch_norm_infer(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                        const std::vector<double>& running_mean,
                        const std::vector<double>& running_var, double eps) {
  if (int(gamma.size()) != x.c || int(beta.size()) != x.c)
    throw ShapeError("batch_norm: parameter channel mismatch");
  const size_t plane = size_t(x.h) * x.w;
  Tensor out(x.n, x.c, x.h, x.w);
  for (int c = 0; c < x.c; ++c) {
    const double inv = 1.0 / std::sqrt(running_var[c] + eps);
    const double g = gamma.data[c], b = beta.data[c], mu = running_mean[c];
    for (int in = 0; in < x.n; ++in) {
      const double* p = &x.data[x.idx(in, c, 0, 0)];
      double* o = &out.data[out.idx(in, c, 0, 0)];
      for (size_t i = 0; i < plane; ++i) o[i] = g * (p[i] - mu) * inv + b;
    }
  }
  return out;
}

void batch_norm_backward(const Tensor& gout, const BnCache& cache,
                         const Tensor& gamma, Tensor& gx, Tensor& ggamma,
                         Tensor& gbeta) {
  const Tensor& xhat = cache.xhat;
  if (!gout.same_shape(xhat))
    throw ShapeError("batch_norm_backward: gradient shape mismatch");
  const size_t plane = size_t(gout.h) * gout.w;
  const double m = double(gout.n) * plane;
  gx = Tensor(gout.n, gout.c, gout.h, gout.w);
  ggamma = Tensor(gout.c, 1, 1, 1);
  gbeta = Tensor(gout.c, 1, 1, 1);

  for (int c = 0; c < gout.c; ++c) {
    double sum_g = 0.0, sum_gx = 0.0;
    for (int in = 0; in < gout.n; ++in) {
      const double* g = &gout.data[gout.idx(in, c, 0, 0)];
      const double* xh = &xhat.data[xhat.idx(in, c, 0, 0)];
      for (size_t i = 0; i < plane; ++i) {
        sum_g += g[i];
        sum_gx += g[i] * xh[i];
      }
    }
    ggamma.data[c] = sum_gx;
    gbeta.data[c] = sum_g;
    // dx = gamma*inv_std * (g - mean(g) - xhat*mean(g*xhat))
    const double k = gamma.data[c] * cache.inv_std[c];
    const double mg = sum_g / m, mgx = sum_gx / m;
    for (int in = 0; in < gout.n; ++in) {
      const double* g = &gout.data[gout.idx(in, c, 0, 0)];
      const double* xh = &xhat.data[xhat.idx(in, c, 0, 0)];
      double* o = &gx.data[gx.idx(in, c, 0, 0)];
      for (size_t i = 0; i < plane; ++i) o[i] = k * (g[i] - mg - xh[i] * mgx);
    }
  }
}

Tensor relu(const Tensor& x) {
  Tensor out(x.n, x.c, x.h, x.w);
  for (size_t i = 0; i < x.size(); ++i) out.data[i] = x.data[i] > 0 ? x.data[i] : 0;
  return out;
}

Tensor relu_backward(const Tensor& gout, const Tensor& y) {
  if (!gout.same_shape(y)) throw ShapeError("relu_backward: shape mismatch");
  Tensor gx(y.n, y.c, y.h, y.w);
  for (size_t i = 0; i < y.size(); ++i)
    gx.data[i] = y.data[i] > 0 ? gout.data[i] : 0.0;
  return gx;
}

Tensor sigmoid(const Tensor& x) {
  Tensor out(x.n, x.c, x.h, x.w);
  for (size_t i = 0; i < x.size(); ++i)
    out.data[i] = 1.0 / (1.0 + std::exp(-x.data[i]));
  return out;
}

Tensor sigmoid_backward(const Tensor& gout, const Tensor& y) {
  if (!gout.same_shape(y)) throw ShapeError("sigmoid_backward: shape mismatch");
  Tensor gx(y.n, y.c, y.h, y.w);
  for (size_t i = 0; i < y.size(); ++i)
    gx.data[i] = gout.data[i] * y.data[i] * (1.0 - y.data[i]);
  return gx;
}

Tensor max_pool2(const Tensor& x, std::vector<int>& argmax) {
  if (x.h <= 0 || x.w <= 0) throw ShapeError("max_pool2: non-positive dims");
  if (x.h % 2 != 0 || x.w % 2 != 0)
    throw ShapeError("max_pool2: H and W must be even");
  const int oh = x.h / 2, ow = x.w / 2;
  Tensor out(x.n, x.c, oh, ow);
  argmax.assign(out.size(), 0);
  size_t o = 0;
  for (int in = 0; in < x.n; ++in) {
    for (int c = 0; c < x.c; ++c) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox, ++o) {
          size_t base = x.idx(in, c, oy * 2, ox * 2);
          // Row-major scan; strict > keeps the first occurrence on ties.
          size_t best = base;
          double bv = x.data[base];
          const size_t cand[3] = {base + 1, base + x.w, base + x.w + 1};
          for (size_t k : cand)
            if (x.data[k] > bv) {
              bv = x.data[k];
              best = k;
            }
          out.data[o] = bv;
          argmax[o] = int(best);
        }
      }
    }
  }
  return out;
}

Tensor max_pool2_backward(const Tensor& gout, const std::vector<int>& argmax,
                          int n, int c, int h, int w) {
  if (gout.size() != argmax.size())
    throw ShapeError("max_pool2_backward: argmax size mismatch");
  Tensor gx(n, c, h, w);
  for (size_t i = 0; i < gout.size(); ++i)
    gx.data[size_t(argmax[i])] += gout.data[i];
  return gx;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (a.n != b.n || a.h != b.h || a.w != b.w)
    throw ShapeError("concat_channels: spatial/batch mismatch");
  Tensor out(a.n, a.c + b.c, a.h, a.w);
  const size_t plane = size_t(a.h) * a.w;
  for (int in = 0; in < a.n; ++in) {
    std::copy_n(&a.data[a.idx(in, 0, 0, 0)], plane * a.c,
                &out.data[out.idx(in, 0, 0, 0)]);
    std::copy_n(&b.data[b.idx(in, 0, 0, 0)], plane * b.c,
                &out.data[out.idx(in, a.c, 0, 0)]);
  }
  return out;
}

void concat_channels_backward(const Tensor& gout, int a_channels, Tensor& ga,
                              Tensor& gb) {
  const int b_channels = gout.c - a_channels;
  ga = Tensor(gout.n, a_channels, gout.h, gout.w);
  gb = Tensor(gout.n, b_channels, gout.h, gout.w);
  const size_t plane = size_t(gout.h) * gout.w;
  for (int in = 0; in < gout.n; ++in) {
    std::copy_n(&gout.data[gout.idx(in, 0, 0, 0)], plane * a_channels,
                &ga.data[ga.idx(in, 0, 0, 0)]);
    std::copy_n(&gout.data[gout.idx(in, a_channels, 0, 0)], plane * b_channels,
                &gb.data[gb.idx(in, 0, 0, 0)]);
  }
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw ShapeError("add: shape mismatch");
  Tensor out(a.n, a.c, a.h, a.w);
  for (size_t i = 0; i < a.size(); ++i) out.data[i] = a.data[i] + b.data[i];
  return out;
}

double bce_loss(const Tensor& p, const Tensor& t) {
  if (!p.same_shape(t)) throw ShapeError("bce_loss: shape mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    double pc = std::clamp(p.data[i], kBceEps, 1.0 - kBceEps);
    acc += -(t.data[i] * std::log(pc) + (1.0 - t.data[i]) * std::log(1.0 - pc));
  }
  return acc / double(p.size());
}

Tensor bce_loss_backward(const Tensor& p, const Tensor& t) {
  if (!p.same_shape(t)) throw ShapeError("bce_loss: shape mismatch");
  Tensor gp(p.n, p.c, p.h, p.w);
  const double inv_n = 1.0 / double(p.size());
  for (size_t i = 0; i < p.size(); ++i) {
    double v = p.data[i];
    if (v < kBceEps || v > 1.0 - kBceEps) {
      gp.data[i] = 0.0;  // inside the clamp plateau
      continue;
    }
    gp.data[i] = (v - t.data[i]) / (v * (1.0 - v)) * inv_n;
  }
  return gp;
}

}  // namespace suim::nn
