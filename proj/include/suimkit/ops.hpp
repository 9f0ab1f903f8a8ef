#pragma once

#include <vector>

#include "suimkit/tensor.hpp"

namespace suim::nn {

// Forward/backward kernels for the fixed layer set. All functions are
// pure: outputs are returned, gradients are written to caller-provided
// tensors. Weight layouts: conv (Cout, Cin, kh, kw); transposed conv
// (Cin, Cout, kh, kw); biases and BN parameters (C, 1, 1, 1).

// Output spatial dims: floor((H + 2*pad - kh)/stride) + 1.
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, int stride,
              int pad);
void conv2d_backward(const Tensor& gout, const Tensor& x, const Tensor& w,
                     int stride, int pad, Tensor& gx, Tensor& gw, Tensor& gb);

// Output spatial dims: (H-1)*stride + kh, no padding. Adjoint of conv2d:
// <conv(a,W), b> == <a, tconv(b,W)> under matched geometry.
Tensor conv2d_transpose(const Tensor& x, const Tensor& w, const Tensor& bias,
                        int stride);
void conv2d_transpose_backward(const Tensor& gout, const Tensor& x,
                               const Tensor& w, int stride, Tensor& gx,
                               Tensor& gw, Tensor& gb);

inline constexpr double kBnEps = 1e-5;
inline constexpr double kBnMomentum = 0.99;

struct BnCache {
  std::vector<double> mean, inv_std;  // per channel
  Tensor xhat;
};

// Train mode: normalizes per channel over N*H*W with batch statistics and
// folds them into the running stats (running = m*running + (1-m)*batch).
Tensor batch_norm_train(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                        std::vector<double>& running_mean,
                        std::vector<double>& running_var, double momentum,
                        double eps, BnCache& cache);
Tensor batch_norm_infer(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                        const std::vector<double>& running_mean,
                        const std::vector<double>& running_var, double eps);
void batch_norm_backward(const Tensor& gout, const BnCache& cache,
                         const Tensor& gamma, Tensor& gx, Tensor& ggamma,
                         Tensor& gbeta);

Tensor relu(const Tensor& x);
Tensor relu_backward(const Tensor& gout, const Tensor& y);  // y = relu output

Tensor sigmoid(const Tensor& x);
Tensor sigmoid_backward(const Tensor& gout, const Tensor& y);  // y = sigmoid out

// 2x2 window, stride 2; H and W must be even. Backward routes the
// gradient to the argmax (first occurrence in row-major order on ties).
Tensor max_pool2(const Tensor& x, std::vector<int>& argmax);
Tensor max_pool2_backward(const Tensor& gout, const std::vector<int>& argmax,
                          int n, int c, int h, int w);

Tensor concat_channels(const Tensor& a, const Tensor& b);
void concat_channels_backward(const Tensor& gout, int a_channels, Tensor& ga,
                              Tensor& gb);

Tensor add(const Tensor& a, const Tensor& b);

inline constexpr double kBceEps = 1e-7;

// Mean over all elements of -[t log p + (1-t) log(1-p)], predictions
// clamped to [kBceEps, 1-kBceEps].
double bce_loss(const Tensor& p, const Tensor& t);
Tensor bce_loss_backward(const Tensor& p, const Tensor& t);

}  // namespace suim::nn
