#pragma once

#include <cstddef>
#include <vector>

#include "glyphsmith/tensor.hpp"

// Neural-network primitives on single samples. Feature maps are [C, H, W];
// dense layers take [N, in]. Backward functions recompute whatever they need
// from the forward inputs.

namespace glyphsmith::nn {

inline constexpr double kGroupNormEpsilon = 1e-5;

/// y[n, o] = sum_i x[n, i] * w[o, i] + b[o]
Tensor dense(const Tensor& x, const Tensor& w, const Tensor& b);
struct DenseGrads {
  Tensor dx, dw, db;
};
DenseGrads dense_backward(const Tensor& x, const Tensor& w, const Tensor& dy);

/// Stride 1, zero padding 1. k is [C_out, C_in, 3, 3].
Tensor conv3x3(const Tensor& x, const Tensor& k, const Tensor& b);
struct ConvGrads {
  Tensor dx, dk, db;
};
ConvGrads conv3x3_backward(const Tensor& x, const Tensor& k, const Tensor& dy, bool need_input_grad = true);

/// Group normalization over (channels in group, H, W) with population
/// variance; scale and shift are per channel.
Tensor groupnorm(const Tensor& x, std::size_t groups, const Tensor& scale, const Tensor& shift);
struct GroupNormGrads {
  Tensor dx, dscale, dshift;
};
GroupNormGrads groupnorm_backward(const Tensor& x, std::size_t groups, const Tensor& scale, const Tensor& dy);

Tensor relu(const Tensor& x);
/// Gradient 0 at x == 0.
Tensor relu_backward(const Tensor& x, const Tensor& dy);

/// 2x2 max pooling, stride 2. H and W must be even. Ties go to the first
/// element in row-major window order.
Tensor maxpool2(const Tensor& x);
Tensor maxpool2_backward(const Tensor& x, const Tensor& dy);

/// Softmax along `axis` of a tensor of any rank.
Tensor softmax(const Tensor& x, std::size_t axis);
Tensor softmax_backward(const Tensor& y, const Tensor& dy, std::size_t axis);

}  // namespace glyphsmith::nn
