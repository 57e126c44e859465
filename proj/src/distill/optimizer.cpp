#include "loqi/distill/optimizer.hpp"

#include <cmath>

#include "loqi/core/errors.hpp"

namespace loqi {

AdamW::AdamW(std::size_t size, double beta1, double beta2, double epsilon, double weight_decay)
    : beta1_(beta1), beta2_(beta2), epsilon_(epsilon), weight_decay_(weight_decay), m_(size, 0.0), v_(size, 0.0) {}

void AdamW::step(std::span<double> params, std::span<const double> grad, std::span<const std::uint8_t> mask,
                 double lr) {
  if (params.size() != m_.size() || grad.size() != m_.size() || (!mask.empty() && mask.size() != m_.size())) {
    throw ValidationError("optimizer buffers do not match the parameter count");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!mask.empty() && mask[i] == 0) continue;
    const double g = grad[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
    const double mh = m_[i] / c1;
    const double vh = v_[i] / c2;
    params[i] -= lr * (mh / (std::sqrt(vh) + epsilon_) + weight_decay_ * params[i]);
  }
}

}  // namespace loqi
