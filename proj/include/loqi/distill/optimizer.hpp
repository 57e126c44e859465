#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace loqi {

/// Adam with decoupled weight decay:
///   p -= lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * p)
class AdamW {
 public:
  AdamW(std::size_t size, double beta1, double beta2, double epsilon, double weight_decay);

  /// Updates params where mask is nonzero (an empty mask means all).
  void step(std::span<double> params, std::span<const double> grad, std::span<const std::uint8_t> mask, double lr);

  std::uint64_t steps() const noexcept { return t_; }
  std::vector<double>& first_moment() noexcept { return m_; }
  std::vector<double>& second_moment() noexcept { return v_; }
  const std::vector<double>& first_moment() const noexcept { return m_; }
  const std::vector<double>& second_moment() const noexcept { return v_; }
  void set_steps(std::uint64_t t) noexcept { t_ = t; }

 private:
  double beta1_, beta2_, epsilon_, weight_decay_;
  std::uint64_t t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace loqi
