#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "skelvol/rng.hpp"
#include "skelvol/tensor.hpp"

namespace skelvol::nn {

// ---------------------------------------------------------------------------
// 3D convolution (cross-correlation), stride 1.
// ---------------------------------------------------------------------------

template <typename T>
struct Conv3dLayer {
  Tensor<T> weight;  // (out, in, kx, ky, kz)
  Tensor<T> bias;    // (out)
  bool same_padding = true;

  Conv3dLayer() = default;
  /// Zero-initialized. Same padding requires odd kernel extents.
  Conv3dLayer(std::size_t in_channels, std::size_t out_channels, std::array<std::size_t, 3> kernel, bool same_padding);

  std::size_t in_channels() const { return weight.extent(1); }
  std::size_t out_channels() const { return weight.extent(0); }
  std::array<std::size_t, 3> kernel() const { return {weight.extent(2), weight.extent(3), weight.extent(4)}; }
  std::array<std::size_t, 3> padding() const;
  /// Output spatial extents for an input of the given extents (ShapeMismatch
  /// when a valid convolution would be empty).
  std::array<std::size_t, 3> output_extents(std::array<std::size_t, 3> in) const;
};

template <typename T>
struct Conv3dGrads {
  Tensor<T> grad_input;   // empty when not requested
  Tensor<T> grad_weight;
  Tensor<T> grad_bias;
};

/// x: (N, C, X, Y, Z) -> (N, O, X', Y', Z').
template <typename T>
Tensor<T> conv3d_forward(const Tensor<T>& x, const Conv3dLayer<T>& layer);

template <typename T>
Conv3dGrads<T> conv3d_backward(const Tensor<T>& grad_out, const Tensor<T>& x, const Conv3dLayer<T>& layer,
                               bool need_input_grad = true);

/// Adds parameter gradients into grad_weight/grad_bias (which must already
/// have the parameter shapes) and, if grad_input is non-null, writes the
/// input gradient there.
template <typename T>
void conv3d_backward_accumulate(const Tensor<T>& grad_out, const Tensor<T>& x, const Conv3dLayer<T>& layer,
                                Tensor<T>* grad_input, Tensor<T>& grad_weight, Tensor<T>& grad_bias);

// ---------------------------------------------------------------------------
// Max pooling, cubic window, floor mode.
// ---------------------------------------------------------------------------

template <typename T>
struct PoolResult {
  Tensor<T> output;
  std::vector<std::size_t> argmax;  // flat input offset per output element
  Shape input_shape;
};

/// Ties resolve to the first position in (x, y, z) scan order.
template <typename T>
PoolResult<T> maxpool3d_forward(const Tensor<T>& x, std::size_t window = 2, std::size_t stride = 2);

template <typename T>
Tensor<T> maxpool3d_backward(const Tensor<T>& grad_out, const PoolResult<T>& forward);

// ---------------------------------------------------------------------------
// Elementwise.
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> relu(const Tensor<T>& x);

/// Passes gradient where x > 0; the subgradient at 0 is 0.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& grad_out, const Tensor<T>& x);

template <typename T>
struct DropoutResult {
  Tensor<T> output;
  std::vector<T> scale;  // 0 or 1/(1-p) per element; empty for identity
};

/// Inverted dropout. Identity when !training or p == 0. Throws
/// InvalidProbability unless 0 <= p < 1.
template <typename T>
DropoutResult<T> dropout(const Tensor<T>& x, double p, Rng& rng, bool training);

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& grad_out, const DropoutResult<T>& forward);

// ---------------------------------------------------------------------------
// Fully connected.
// ---------------------------------------------------------------------------

template <typename T>
struct DenseLayer {
  Tensor<T> weight;  // (out, in)
  Tensor<T> bias;    // (out)

  DenseLayer() = default;
  DenseLayer(std::size_t in, std::size_t out) : weight({out, in}), bias({out}) {}

  std::size_t in_features() const { return weight.extent(1); }
  std::size_t out_features() const { return weight.extent(0); }
};

template <typename T>
struct DenseGrads {
  Tensor<T> grad_input;
  Tensor<T> grad_weight;
  Tensor<T> grad_bias;
};

/// x: (N, in) -> (N, out), y = W x + b per row.
template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, const DenseLayer<T>& layer);

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& grad_out, const Tensor<T>& x, const DenseLayer<T>& layer);

template <typename T>
void dense_backward_accumulate(const Tensor<T>& grad_out, const Tensor<T>& x, const DenseLayer<T>& layer,
                               Tensor<T>* grad_input, Tensor<T>& grad_weight, Tensor<T>& grad_bias);

// ---------------------------------------------------------------------------
// Softmax cross-entropy.
// ---------------------------------------------------------------------------

using ProbVector = std::vector<double>;

/// Max-shifted softmax, evaluated in double.
template <typename T>
ProbVector softmax(std::span<const T> logits);

template <typename T>
struct SoftmaxLoss {
  double loss = 0.0;
  ProbVector probs;
  std::vector<T> grad_logits;  // probs - onehot(target)
};

/// Needs K >= 2 (InvalidParams) and target < K (InvalidTarget).
template <typename T>
SoftmaxLoss<T> softmax_cross_entropy(std::span<const T> logits, std::size_t target);

}  // namespace skelvol::nn
