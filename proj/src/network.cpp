#include "pidcnn/network.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "pidcnn/rng.hpp"
#include "pidcnn/scene.hpp"

namespace pidcnn {
namespace {

constexpr double kAlphaInit = 0.25;

std::string block_name(std::size_t block) { return "block" + std::to_string(block + 1); }

std::string fc_name(std::size_t head) { return "fc" + std::to_string(head); }

template <typename S>
BasicTensor<S> normal_tensor(Rng& rng, Shape shape, double stddev) {
  BasicTensor<S> t(std::move(shape));
  for (auto& v : t.data()) v = static_cast<S>(rng.normal() * stddev);
  return t;
}

template <typename S>
void add_head(ModelWeights<S>& w, std::size_t head, Rng* rng) {
  const std::size_t d = w.config.state_dim();
  const std::string n = fc_name(head);
  w.params.add(n + ".weight", rng ? normal_tensor<S>(*rng, {d, 3}, std::sqrt(1.0 / static_cast<double>(d)))
                                  : BasicTensor<S>::zeros({d, 3}));
  w.params.add(n + ".bias", BasicTensor<S>::zeros({3}));
}

template <typename S>
TracedValue<S> param(Tape<S>& tape, ModelWeights<S>& w, const std::string& name) {
  return tape.parameter(w.params.at(name));
}

template <typename S>
TracedValue<S> conv_bn_act(const TracedValue<S>& x, ModelWeights<S>& w, const std::string& prefix, int layer,
                           Mode mode) {
  auto& tape = x.tape();
  const std::string l = std::to_string(layer);
  auto y = conv_ct33(x, param(tape, w, prefix + ".conv" + l + ".weight"), param(tape, w, prefix + ".conv" + l + ".bias"));
  auto stats = w.buffers.find(prefix + ".bn" + l);
  if (stats == w.buffers.end()) throw std::invalid_argument("missing running statistics for " + prefix + ".bn" + l);
  BatchNormOptions opts;
  opts.mode = mode;
  y = batch_norm(y, param(tape, w, prefix + ".bn" + l + ".gamma"), param(tape, w, prefix + ".bn" + l + ".beta"),
                 stats->second, opts);
  if (w.config.activation == Activation::prelu) return prelu(y, param(tape, w, prefix + ".act" + l + ".alpha"));
  return relu(y);
}

}  // namespace

std::string to_string(Pooling p) { return p == Pooling::average ? "avg" : "max"; }
std::string to_string(Activation a) { return a == Activation::prelu ? "prelu" : "relu"; }

Pooling parse_pooling(const std::string& s) {
  if (s == "avg") return Pooling::average;
  if (s == "max") return Pooling::max;
  throw std::invalid_argument("unknown pooling '" + s + "' (expected avg or max)");
}

Activation parse_activation(const std::string& s) {
  if (s == "prelu") return Activation::prelu;
  if (s == "relu") return Activation::relu;
  throw std::invalid_argument("unknown activation '" + s + "' (expected prelu or relu)");
}

void NetworkConfig::validate() const {
  if (n_blocks < 1 || n_blocks > 20) throw std::invalid_argument("network: n_blocks must be in [1, 20]");
  if (input_channels < 1) throw std::invalid_argument("network: need at least one input channel");
  if (image_size != (std::size_t{1} << (n_blocks + 1))) {
    throw std::invalid_argument("network: image size " + std::to_string(image_size) + " does not match " +
                                std::to_string(n_blocks) + " blocks (need " +
                                std::to_string(std::size_t{1} << (n_blocks + 1)) + ")");
  }
  target_length(frames);
}

std::size_t NetworkConfig::output_dim() const { return target_length(frames); }

std::string NetworkConfig::architecture() const {
  return "size=" + std::to_string(image_size) + ";blocks=" + std::to_string(n_blocks) +
         ";inputs=" + std::to_string(input_channels) + ";pool=" + to_string(pooling) +
         ";act=" + to_string(activation);
}

std::string NetworkConfig::fingerprint() const { return architecture() + ";frames=" + std::to_string(frames); }

NetworkConfig scaled_config(std::size_t image_size, std::size_t frames) {
  if (image_size < 4 || (image_size & (image_size - 1)) != 0) {
    throw std::invalid_argument("scaled_config: image size must be a power of two >= 4");
  }
  NetworkConfig c;
  c.image_size = image_size;
  c.n_blocks = static_cast<std::size_t>(std::countr_zero(image_size)) - 1;
  c.frames = frames;
  c.validate();
  return c;
}

template <typename S>
ModelWeights<S> init_weights(const NetworkConfig& config, std::uint64_t seed) {
  config.validate();
  ModelWeights<S> w;
  w.config = config;
  Rng rng(seed);
  for (std::size_t b = 0; b < config.n_blocks; ++b) {
    const std::size_t c = config.block_channels(b);
    const std::string p = block_name(b);
    const double stddev = std::sqrt(2.0 / (static_cast<double>(c * 9) * (1.0 + kAlphaInit * kAlphaInit)));
    for (int l = 1; l <= 2; ++l) {
      const std::string n = std::to_string(l);
      w.params.add(p + ".conv" + n + ".weight", normal_tensor<S>(rng, {c, c, 1, 3, 3}, stddev));
      w.params.add(p + ".conv" + n + ".bias", BasicTensor<S>::zeros({c}));
      w.params.add(p + ".bn" + n + ".gamma", BasicTensor<S>::full({c}, S{1}));
      w.params.add(p + ".bn" + n + ".beta", BasicTensor<S>::zeros({c}));
      if (config.activation == Activation::prelu) {
        w.params.add(p + ".act" + n + ".alpha", BasicTensor<S>::full({c}, static_cast<S>(kAlphaInit)));
      }
      w.buffers.emplace(p + ".bn" + n, RunningStats<S>::standard(c));
    }
  }
  add_head(w, 1, &rng);
  for (std::size_t h = 2; h <= config.frames; ++h) add_head<S>(w, h, nullptr);
  return w;
}

template <typename S>
std::size_t count_parameters(const ModelWeights<S>& weights) {
  std::size_t n = 0;
  for (const auto& p : weights.params) n += p.value.size();
  return n;
}

template <typename S>
void copy_shared(const ModelWeights<S>& src, ModelWeights<S>& dst) {
  for (auto& p : dst.params) {
    if (!src.params.contains(p.name)) continue;
    const auto& from = src.params.at(p.name).value;
    if (from.shape() != p.value.shape()) {
      throw ShapeError("copy_shared: " + p.name + " has shape " + to_string(from.shape()) + " in the source but " +
                       to_string(p.value.shape()) + " in the destination");
    }
    p.value = from;
  }
  for (auto& [name, st] : dst.buffers) {
    auto it = src.buffers.find(name);
    if (it != src.buffers.end()) st = it->second;
  }
}

template <typename S>
ModelWeights<S> transfer_weights(const ModelWeights<S>& src, std::size_t frames) {
  NetworkConfig cfg = src.config;
  cfg.frames = frames;
  cfg.validate();
  ModelWeights<S> dst;
  dst.config = cfg;
  for (const auto& p : src.params) {
    if (p.name.rfind("fc", 0) == 0 && p.name != "fc1.weight" && p.name != "fc1.bias") {
      const std::size_t head = static_cast<std::size_t>(p.name[2] - '0');
      if (head > frames) continue;
    }
    dst.params.add(p.name, p.value);
  }
  for (std::size_t h = 2; h <= frames; ++h) {
    if (!dst.params.contains(fc_name(h) + ".weight")) add_head<S>(dst, h, nullptr);
  }
  dst.buffers = src.buffers;
  return dst;
}

template <typename S>
TracedValue<S> block_forward(const TracedValue<S>& x, ModelWeights<S>& weights, std::size_t block, Mode mode) {
  const auto& shape = x.shape();
  if (shape.size() != 5) throw ShapeError("block_forward: expected [N,C,T,H,W], got " + to_string(shape));
  const std::size_t c = weights.config.block_channels(block);
  if (shape[1] != c) {
    throw ShapeError("block_forward: block " + std::to_string(block + 1) + " expects " + std::to_string(c) +
                     " channels, got " + to_string(shape));
  }
  const std::string p = block_name(block);
  auto y = conv_bn_act(x, weights, p, 1, mode);
  y = conv_bn_act(y, weights, p, 2, mode);
  auto joined = concat_channels(y, x);
  return weights.config.pooling == Pooling::average ? avg_pool2(joined) : max_pool2(joined);
}

template <typename S>
TracedValue<S> backbone_forward(const TracedValue<S>& x, ModelWeights<S>& weights, Mode mode) {
  const auto& cfg = weights.config;
  const auto& shape = x.shape();
  if (shape.size() != 5 || shape[1] != cfg.input_channels || shape[2] != cfg.frames || shape[3] != cfg.image_size ||
      shape[4] != cfg.image_size) {
    throw ShapeError("backbone_forward: expected [N," + std::to_string(cfg.input_channels) + "," +
                     std::to_string(cfg.frames) + "," + std::to_string(cfg.image_size) + "," +
                     std::to_string(cfg.image_size) + "], got " + to_string(shape));
  }
  auto h = x;
  for (std::size_t b = 0; b < cfg.n_blocks; ++b) h = block_forward(h, weights, b, mode);
  return h;
}

template <typename S>
std::vector<TracedValue<S>> split_states(const TracedValue<S>& features) {
  const auto& shape = features.shape();
  if (shape.size() != 5 || shape[3] != 2 || shape[4] != 2) {
    throw ShapeError("split_states: expected [N,C,T,2,2], got " + to_string(shape));
  }
  std::vector<TracedValue<S>> states;
  for (std::size_t t = 0; t < shape[2]; ++t) states.push_back(time_slice_flatten(features, t));
  return states;
}

template <typename S>
TracedValue<S> head_forward(const std::vector<TracedValue<S>>& states, ModelWeights<S>& weights, HeadKind kind) {
  const std::size_t frames = states.size();
  target_length(frames);
  if (frames != weights.config.frames) {
    throw std::invalid_argument("head_forward: " + std::to_string(frames) + " states for a " +
                                std::to_string(weights.config.frames) + "-frame network");
  }
  auto& tape = states.front().tape();
  const bool residual = kind == HeadKind::residual;
  auto fc = [&](std::size_t head, const TracedValue<S>& s) {
    return fully_connected(s, param(tape, weights, fc_name(head) + ".weight"), param(tape, weights, fc_name(head) + ".bias"));
  };

  std::vector<TracedValue<S>> parts;
  for (const auto& s : states) parts.push_back(fc(1, s));
  std::vector<TracedValue<S>> v;
  for (std::size_t i = 0; i + 1 < frames; ++i) {
    auto diff = sub(parts[i + 1], parts[i]);
    v.push_back(residual ? add(diff, fc(2, sub(states[i + 1], states[i]))) : diff);
  }
  parts.insert(parts.end(), v.begin(), v.end());
  if (frames == 3) {
    auto diff = sub(v[1], v[0]);
    if (residual) {
      auto curvature = add(sub(states[2], add(states[1], states[1])), states[0]);
      diff = add(diff, fc(3, curvature));
    }
    parts.push_back(diff);
  }
  return concat_channels(std::span<const TracedValue<S>>(parts));
}

template <typename S>
TracedValue<S> network_forward(Tape<S>& tape, const BasicTensor<S>& input, ModelWeights<S>& weights, Mode mode,
                               HeadKind kind) {
  auto x = tape.constant(input);
  return head_forward(split_states(backbone_forward(x, weights, mode)), weights, kind);
}

BasicTensor<float> predict(const BasicTensor<float>& input, ModelWeights<float>& weights, HeadKind kind) {
  Tape<float> tape;
  return network_forward(tape, input, weights, Mode::eval, kind).value();
}

#define PIDCNN_INSTANTIATE(S)                                                                                       \
  template ModelWeights<S> init_weights<S>(const NetworkConfig&, std::uint64_t);                                   \
  template std::size_t count_parameters<S>(const ModelWeights<S>&);                                                \
  template ModelWeights<S> transfer_weights<S>(const ModelWeights<S>&, std::size_t);                               \
  template void copy_shared<S>(const ModelWeights<S>&, ModelWeights<S>&);                                          \
  template TracedValue<S> block_forward<S>(const TracedValue<S>&, ModelWeights<S>&, std::size_t, Mode);            \
  template TracedValue<S> backbone_forward<S>(const TracedValue<S>&, ModelWeights<S>&, Mode);                       \
  template std::vector<TracedValue<S>> split_states<S>(const TracedValue<S>&);                                     \
  template TracedValue<S> head_forward<S>(const std::vector<TracedValue<S>>&, ModelWeights<S>&, HeadKind);         \
  template TracedValue<S> network_forward<S>(Tape<S>&, const BasicTensor<S>&, ModelWeights<S>&, Mode, HeadKind);

PIDCNN_INSTANTIATE(float)
PIDCNN_INSTANTIATE(double)

}  // namespace pidcnn
