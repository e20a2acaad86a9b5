#pragma once

#include "pidcnn/autodiff.hpp"

namespace pidcnn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  /// Throws std::invalid_argument unless 0 < beta1, beta2 < 1 and epsilon > 0.
  void validate() const;
};

/// One bias-corrected Adam update of every parameter in the store, then
/// clears the gradients. Every parameter must carry a gradient.
template <typename S>
void adam_step(ParameterStore<S>& store, const AdamConfig& cfg);

extern template void adam_step(ParameterStore<float>&, const AdamConfig&);
extern template void adam_step(ParameterStore<double>&, const AdamConfig&);

}  // namespace pidcnn
