#pragma once

#include <optional>
#include <span>

#include "pidcnn/autodiff.hpp"

namespace pidcnn {

enum class Mode { train, eval };

/// Running mean/variance for one batch-norm layer. Empty until initialised
/// explicitly or by a train-mode pass.
template <typename Scalar>
struct RunningStats {
  std::optional<BasicTensor<Scalar>> mean;
  std::optional<BasicTensor<Scalar>> var;

  /// Mean 0, variance 1 for `channels` channels.
  static RunningStats standard(std::size_t channels) {
    return {BasicTensor<Scalar>::zeros({channels}), BasicTensor<Scalar>::full({channels}, Scalar{1})};
  }
};

struct BatchNormOptions {
  Mode mode = Mode::train;
  double momentum = 0.9;  // running = momentum * running + (1 - momentum) * batch
  double epsilon = 1e-5;
};

/// Convolution over [N,Cin,T,H,W] with kernel [Cout,Cin,1,3,3]: channels fully
/// mixed, time kernel 1, spatial 3x3 with zero padding 1, stride 1.
template <typename S>
TracedValue<S> conv_ct33(const TracedValue<S>& x, const TracedValue<S>& weight, const TracedValue<S>& bias);

/// Per-channel normalisation over (N,T,H,W) followed by a per-channel affine map.
/// Train mode also folds the batch statistics into `stats`.
template <typename S>
TracedValue<S> batch_norm(const TracedValue<S>& x, const TracedValue<S>& gamma, const TracedValue<S>& beta,
                          RunningStats<S>& stats, const BatchNormOptions& options = {});

/// x for x >= 0, alpha[c] * x otherwise. Channel is axis 1.
template <typename S>
TracedValue<S> prelu(const TracedValue<S>& x, const TracedValue<S>& alpha);

template <typename S>
TracedValue<S> relu(const TracedValue<S>& x);

/// 2x2 mean over H and W with stride 2. H and W must be even.
template <typename S>
TracedValue<S> avg_pool2(const TracedValue<S>& x);

/// 2x2 max over H and W with stride 2. Ties go to the first element in row-major window order.
template <typename S>
TracedValue<S> max_pool2(const TracedValue<S>& x);

/// Concatenation along axis 1. All other extents must agree.
template <typename S>
TracedValue<S> concat_channels(std::span<const TracedValue<S>> parts);

template <typename S>
TracedValue<S> concat_channels(const TracedValue<S>& a, const TracedValue<S>& b);

/// Channels [begin, begin + count) of axis 1.
template <typename S>
TracedValue<S> slice_channels(const TracedValue<S>& x, std::size_t begin, std::size_t count);

/// [N,C,T,H,W] -> [N, C*H*W] holding time index t, channel-major then spatial.
template <typename S>
TracedValue<S> time_slice_flatten(const TracedValue<S>& x, std::size_t t);

/// x [N,D] * weight [D,K] + bias [K].
template <typename S>
TracedValue<S> fully_connected(const TracedValue<S>& x, const TracedValue<S>& weight, const TracedValue<S>& bias);

template <typename S>
TracedValue<S> add(const TracedValue<S>& a, const TracedValue<S>& b);

template <typename S>
TracedValue<S> sub(const TracedValue<S>& a, const TracedValue<S>& b);

/// Elementwise product.
template <typename S>
TracedValue<S> mul(const TracedValue<S>& a, const TracedValue<S>& b);

/// Sum of all elements, shape {1}.
template <typename S>
TracedValue<S> sum(const TracedValue<S>& x);

/// Mean squared error over every element, shape {1}.
template <typename S>
TracedValue<S> mse_loss(const TracedValue<S>& pred, const BasicTensor<S>& target);

}  // namespace pidcnn
