#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pidcnn/ops.hpp"

namespace pidcnn {

enum class Pooling { average, max };
enum class Activation { prelu, relu };

std::string to_string(Pooling p);
std::string to_string(Activation a);
Pooling parse_pooling(const std::string& s);
Activation parse_activation(const std::string& s);

struct NetworkConfig {
  std::size_t image_size = 256;
  std::size_t n_blocks = 7;
  std::size_t input_channels = 2;  // one per view
  std::size_t frames = 3;
  Pooling pooling = Pooling::average;
  Activation activation = Activation::prelu;

  /// Throws std::invalid_argument unless image_size == 2^(n_blocks+1) and 1 <= frames <= 3.
  void validate() const;

  /// Channels entering block k (0-based); block k outputs twice as many.
  std::size_t block_channels(std::size_t block) const { return input_channels << block; }
  std::size_t final_channels() const { return input_channels << n_blocks; }
  std::size_t state_dim() const { return final_channels() * 4; }
  std::size_t output_dim() const;
  std::size_t conv_layers() const { return 2 * n_blocks; }
  std::size_t fc_layers() const { return frames; }

  /// Everything except the frame count, as text. Stages of one curriculum share it.
  std::string architecture() const;
  /// architecture() plus the frame count.
  std::string fingerprint() const;

  bool operator==(const NetworkConfig&) const = default;
};

/// Scaled configuration with the given image size: n_blocks = log2(size) - 1.
NetworkConfig scaled_config(std::size_t image_size, std::size_t frames);

template <typename S>
struct ModelWeights {
  NetworkConfig config;
  ParameterStore<S> params;
  std::map<std::string, RunningStats<S>> buffers;  // keyed by "blockK.bnJ"
};

/// Fresh weights. Conv weights normal with variance 2/(fan_in*(1+0.25^2)),
/// FC1 normal with variance 1/state_dim, FC2/FC3 and every bias zero,
/// BN gamma 1 / beta 0 with running mean 0 / var 1, PReLU alpha 0.25.
template <typename S>
ModelWeights<S> init_weights(const NetworkConfig& config, std::uint64_t seed);

/// Trainable element count; running statistics excluded.
template <typename S>
std::size_t count_parameters(const ModelWeights<S>& weights);

/// Copy for a network with one more (or any other) frame count. Shared names
/// keep their values; heads missing from `src` start at zero so the new
/// outputs begin as pure finite differences. Optimizer state starts fresh.
template <typename S>
ModelWeights<S> transfer_weights(const ModelWeights<S>& src, std::size_t frames);

/// Copies every parameter value and running statistic whose name exists in both.
template <typename S>
void copy_shared(const ModelWeights<S>& src, ModelWeights<S>& dst);

template <typename To, typename From>
ModelWeights<To> convert_weights(const ModelWeights<From>& src) {
  ModelWeights<To> out;
  out.config = src.config;
  for (const auto& p : src.params) {
    auto& q = out.params.add(p.name, p.value.template cast<To>());
    q.first_moment = p.first_moment.template cast<To>();
    q.second_moment = p.second_moment.template cast<To>();
    q.step = p.step;
  }
  for (const auto& [name, st] : src.buffers) {
    RunningStats<To> r;
    if (st.mean) r.mean = st.mean->template cast<To>();
    if (st.var) r.var = st.var->template cast<To>();
    out.buffers.emplace(name, std::move(r));
  }
  return out;
}

/// Conv-BN-act twice, concatenation with the input, 2x2 pooling.
/// [N,C,T,H,W] -> [N,2C,T,H/2,W/2]; channels [C,2C) carry the pooled input.
template <typename S>
TracedValue<S> block_forward(const TracedValue<S>& x, ModelWeights<S>& weights, std::size_t block, Mode mode);

/// [N,input_channels,T,S,S] -> [N,final_channels,T,2,2].
template <typename S>
TracedValue<S> backbone_forward(const TracedValue<S>& x, ModelWeights<S>& weights, Mode mode);

/// One [N, C*4] state per time index.
template <typename S>
std::vector<TracedValue<S>> split_states(const TracedValue<S>& features);

enum class HeadKind { residual, difference_only };

/// [N, output_dim] laid out as [p1..pT, v1..v(T-1), a].
template <typename S>
TracedValue<S> head_forward(const std::vector<TracedValue<S>>& states, ModelWeights<S>& weights,
                            HeadKind kind = HeadKind::residual);

template <typename S>
TracedValue<S> head_forward_no_residual(const std::vector<TracedValue<S>>& states, ModelWeights<S>& weights) {
  return head_forward(states, weights, HeadKind::difference_only);
}

/// Full network on an input tensor placed on `tape`.
template <typename S>
TracedValue<S> network_forward(Tape<S>& tape, const BasicTensor<S>& input, ModelWeights<S>& weights, Mode mode,
                               HeadKind kind = HeadKind::residual);

/// Plain inference: eval mode, no gradients kept.
BasicTensor<float> predict(const BasicTensor<float>& input, ModelWeights<float>& weights,
                           HeadKind kind = HeadKind::residual);

}  // namespace pidcnn
