#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "loqi/losses/losses.hpp"

namespace loqi {

enum class LossTerm : std::uint8_t { ickd = 1, mse = 2, triplet = 4 };

/// Non-empty subset of {ICKD, MSE, Triplet}.
class LossMask {
 public:
  constexpr LossMask() = default;
  constexpr explicit LossMask(std::uint8_t bits) : bits_(bits & 7u) {}

  static LossMask all() { return LossMask(7); }
  /// Comma-separated terms, e.g. "ickd,mse,triplet" (case-insensitive).
  static LossMask parse(std::string_view text);
  /// The seven non-empty combinations, in bit order.
  static std::vector<LossMask> combinations();

  bool has(LossTerm t) const noexcept { return (bits_ & static_cast<std::uint8_t>(t)) != 0; }
  bool empty() const noexcept { return bits_ == 0; }
  std::uint8_t bits() const noexcept { return bits_; }
  LossMask with(LossTerm t) const { return LossMask(bits_ | static_cast<std::uint8_t>(t)); }
  std::string to_string() const;

  friend bool operator==(LossMask, LossMask) = default;

 private:
  std::uint8_t bits_ = 0;
};

enum class LrSchedule {
  exponential,   // lr_init * lr_exp_decay^t
  inverse_time,  // lr_init / (1 + lr_time_decay * t)
};

enum class PositiveRule {
  automatic,  // radius when records carry poses, place_id otherwise
  radius,
  place_id,
};

std::string to_string(LrSchedule s);
LrSchedule parse_lr_schedule(std::string_view text);
std::string to_string(PositiveRule r);
PositiveRule parse_positive_rule(std::string_view text);

struct TrainingConfig {
  double lr_init = 1e-5;
  double lr_exp_decay = 0.99999;
  LrSchedule lr_schedule = LrSchedule::exponential;
  double lr_time_decay = 2e-11;
  double weight_decay = 2e-11;
  int negatives_per_sample = 5;
  int max_positives = 10;
  int epochs = 1;
  LossMask loss_mask = LossMask::all();
  LossWeights weights;
  double positive_radius_m = 25.0;
  PositiveRule positive_rule = PositiveRule::automatic;
  int batch_size = 1;
  std::uint64_t seed = 0;

  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  // Write a resumable train state every N steps (0: only when stopped early).
  int checkpoint_every = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainingConfig from_json(const nlohmann::json& j);
};

double lr_at_step(const TrainingConfig& cfg, std::uint64_t t);

}  // namespace loqi
