#include "pidcnn/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace pidcnn {

void AdamConfig::validate() const {
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw std::invalid_argument("adam: beta1 must lie in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw std::invalid_argument("adam: beta2 must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("adam: epsilon must be positive");
}

template <typename S>
void adam_step(ParameterStore<S>& store, const AdamConfig& cfg) {
  cfg.validate();
  // Check everything before touching anything so a failure leaves the store intact.
  for (const auto& p : store) {
    if (!p.grad) throw std::invalid_argument("adam_step: parameter '" + p.name + "' has no gradient");
    require_same_shape(p.grad->shape(), p.value.shape(), "adam_step gradient");
  }
  for (auto& p : store) {
    p.step += 1;
    const double t = static_cast<double>(p.step);
    const double correction1 = 1.0 - std::pow(cfg.beta1, t);
    const double correction2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = (*p.grad)[i];
      const double m = cfg.beta1 * p.first_moment[i] + (1.0 - cfg.beta1) * g;
      const double v = cfg.beta2 * p.second_moment[i] + (1.0 - cfg.beta2) * g * g;
      p.first_moment[i] = static_cast<S>(m);
      p.second_moment[i] = static_cast<S>(v);
      const double m_hat = m / correction1;
      const double v_hat = v / correction2;
      p.value[i] = static_cast<S>(p.value[i] - cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon));
    }
    p.grad.reset();
  }
}

template void adam_step(ParameterStore<float>&, const AdamConfig&);
template void adam_step(ParameterStore<double>&, const AdamConfig&);

}  // namespace pidcnn
