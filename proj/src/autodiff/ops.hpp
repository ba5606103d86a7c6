#pragma once

#include "autodiff/tensor.hpp"
#include "field/image.hpp"

#include <cstddef>
#include <vector>

namespace ptych::ad {

// Elementwise; operands must have identical shapes (no broadcasting).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor square(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
// Subgradient at 0 is 0.
Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope = 0.2);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(double s, const Tensor& a) { return scale(a, s); }

// Scalar reductions (shape {}).
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
// Pairwise sum of equally shaped tensors, in the given order.
Tensor add_n(const std::vector<Tensor>& terms);
// Sum over every axis but the first: (N, ...) -> (N).
Tensor batch_sum(const Tensor& a);

// Repeats a one-element tensor into `shape`.
Tensor expand_scalar(const Tensor& a, Shape shape);

Tensor reshape(const Tensor& a, Shape shape);
// Half-open range [begin, end) along `axis`.
Tensor slice(const Tensor& a, std::size_t axis, std::size_t begin, std::size_t end);
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
// y[i] = a[index[i]]; `index` must be a permutation when used as an
// invertible layer, but repeated indices are allowed.
Tensor gather(const Tensor& a, std::vector<std::size_t> index, Shape shape);

// (m, k) x (k, n).
Tensor matmul(const Tensor& a, const Tensor& b);

// x: (N, C, H, W); weight: (O, C, k, k) with odd k; bias: (O). Stride 1,
// zero "same" padding.
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias);

// (N, C, H, W) -> (N, C, 2H, 2W).
Tensor upsample_nearest2x(const Tensor& x);

// Normalizes each channel of (N, C, H, W) over N*H*W samples to zero mean
// and unit variance (eps = 1e-6), then applies gamma * xhat + beta.
Tensor channel_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta);
inline constexpr double kChannelNormEps = 1e-6;

// y = (x + bias_c) * exp(log_scale_c) on (N, C, H, W).
Tensor actnorm(const Tensor& x, const Tensor& bias, const Tensor& log_scale);
// x = y * exp(-log_scale_c) - bias_c.
Tensor actnorm_inverse(const Tensor& y, const Tensor& bias, const Tensor& log_scale);

// Space-to-channel: (N, C, H, W) -> (N, 4C, H/2, W/2) with output channel
// 4c + 2dy + dx; unsqueeze2x is its inverse.
Tensor squeeze2x(const Tensor& x);
Tensor unsqueeze2x(const Tensor& x);
// Output channel c takes input channel perm[c].
Tensor permute_channels(const Tensor& x, const std::vector<std::size_t>& perm);

// Differentiable Fourier-optics layers on (H, W) planes. fft_layer is the
// unitary DC-centered fft2; its reverse rule is the unitary inverse.
ComplexPair real_to_complex(const Tensor& re);
ComplexPair fft_layer(const ComplexPair& x);
ComplexPair ifft_layer(const ComplexPair& x);
ComplexPair pupil_mask_layer(const ComplexPair& x, const BinaryMask& support);
// sqrt(re^2 + im^2); subgradient (0, 0) at exact zeros.
Tensor magnitude_layer(const ComplexPair& x);
Tensor subsample_layer(const Tensor& x, const BinaryMask& mask);

} // namespace ptych::ad
