#include "loqi/distill/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "loqi/core/errors.hpp"

namespace loqi {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

}  // namespace

LossMask LossMask::parse(std::string_view text) {
  std::uint8_t bits = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    const std::string tok = lower(trim(text.substr(start, end - start)));
    if (tok == "ickd") {
      bits |= 1;
    } else if (tok == "mse") {
      bits |= 2;
    } else if (tok == "triplet") {
      bits |= 4;
    } else {
      throw ValidationError("unknown loss '" + tok + "' in '" + std::string(text) + "' (expected ickd, mse, triplet)");
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (bits == 0) throw ValidationError("loss mask must name at least one of ickd, mse, triplet");
  return LossMask(bits);
}

std::vector<LossMask> LossMask::combinations() {
  std::vector<LossMask> out;
  for (std::uint8_t b = 1; b < 8; ++b) out.emplace_back(b);
  return out;
}

std::string LossMask::to_string() const {
  std::string s;
  auto add = [&](const char* name) { s += (s.empty() ? "" : ",") + std::string(name); };
  if (has(LossTerm::ickd)) add("ickd");
  if (has(LossTerm::mse)) add("mse");
  if (has(LossTerm::triplet)) add("triplet");
  return s;
}

std::string to_string(LrSchedule s) { return s == LrSchedule::exponential ? "exponential" : "inverse_time"; }

LrSchedule parse_lr_schedule(std::string_view text) {
  const std::string t = lower(text);
  if (t == "exponential") return LrSchedule::exponential;
  if (t == "inverse_time" || t == "inverse-time") return LrSchedule::inverse_time;
  throw ValidationError("unknown lr schedule '" + std::string(text) + "' (expected exponential, inverse_time)");
}

std::string to_string(PositiveRule r) {
  switch (r) {
    case PositiveRule::automatic:
      return "auto";
    case PositiveRule::radius:
      return "radius";
    case PositiveRule::place_id:
      return "place_id";
  }
  return "?";
}

PositiveRule parse_positive_rule(std::string_view text) {
  const std::string t = lower(text);
  if (t == "auto") return PositiveRule::automatic;
  if (t == "radius") return PositiveRule::radius;
  if (t == "place_id" || t == "place-id") return PositiveRule::place_id;
  throw ValidationError("unknown positive rule '" + std::string(text) + "' (expected auto, radius, place_id)");
}

void TrainingConfig::validate() const {
  if (!(std::isfinite(lr_init) && lr_init > 0.0)) throw ValidationError("lr_init must be > 0");
  if (!(lr_exp_decay > 0.0 && lr_exp_decay <= 1.0)) throw ValidationError("lr_exp_decay must be in (0, 1]");
  if (!(std::isfinite(lr_time_decay) && lr_time_decay >= 0.0)) throw ValidationError("lr_time_decay must be >= 0");
  if (!(std::isfinite(weight_decay) && weight_decay >= 0.0)) throw ValidationError("weight_decay must be >= 0");
  if (negatives_per_sample < 1) throw ValidationError("negatives_per_sample must be >= 1");
  if (max_positives < 1) throw ValidationError("max_positives must be >= 1");
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (loss_mask.empty()) throw ValidationError("loss mask must be non-empty");
  weights.validate();
  if (!(std::isfinite(positive_radius_m) && positive_radius_m > 0.0)) {
    throw ValidationError("positive_radius_m must be > 0");
  }
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ValidationError("adam betas must be in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ValidationError("adam_epsilon must be > 0");
  if (checkpoint_every < 0) throw ValidationError("checkpoint_every must be >= 0");
}

nlohmann::json TrainingConfig::to_json() const {
  return {
      {"lr_init", lr_init},
      {"lr_exp_decay", lr_exp_decay},
      {"lr_schedule", to_string(lr_schedule)},
      {"lr_time_decay", lr_time_decay},
      {"weight_decay", weight_decay},
      {"negatives_per_sample", negatives_per_sample},
      {"max_positives", max_positives},
      {"epochs", epochs},
      {"loss_mask", loss_mask.to_string()},
      {"alpha", weights.alpha},
      {"beta", weights.beta},
      {"margin", weights.margin},
      {"positive_radius_m", positive_radius_m},
      {"positive_rule", to_string(positive_rule)},
      {"batch_size", batch_size},
      {"seed", seed},
      {"adam_beta1", adam_beta1},
      {"adam_beta2", adam_beta2},
      {"adam_epsilon", adam_epsilon},
      {"checkpoint_every", checkpoint_every},
  };
}

TrainingConfig TrainingConfig::from_json(const nlohmann::json& j) {
  TrainingConfig c;
  try {
    c.lr_init = j.value("lr_init", c.lr_init);
    c.lr_exp_decay = j.value("lr_exp_decay", c.lr_exp_decay);
    if (j.contains("lr_schedule")) c.lr_schedule = parse_lr_schedule(j.at("lr_schedule").get<std::string>());
    c.lr_time_decay = j.value("lr_time_decay", c.lr_time_decay);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.negatives_per_sample = j.value("negatives_per_sample", c.negatives_per_sample);
    c.max_positives = j.value("max_positives", c.max_positives);
    c.epochs = j.value("epochs", c.epochs);
    if (j.contains("loss_mask")) c.loss_mask = LossMask::parse(j.at("loss_mask").get<std::string>());
    c.weights.alpha = j.value("alpha", c.weights.alpha);
    c.weights.beta = j.value("beta", c.weights.beta);
    c.weights.margin = j.value("margin", c.weights.margin);
    c.positive_radius_m = j.value("positive_radius_m", c.positive_radius_m);
    if (j.contains("positive_rule")) c.positive_rule = parse_positive_rule(j.at("positive_rule").get<std::string>());
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
    c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
    c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
    c.adam_epsilon = j.value("adam_epsilon", c.adam_epsilon);
    c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("training config: ") + e.what());
  }
  c.validate();
  return c;
}

double lr_at_step(const TrainingConfig& cfg, std::uint64_t t) {
  const double td = static_cast<double>(t);
  if (cfg.lr_schedule == LrSchedule::inverse_time) return cfg.lr_init / (1.0 + cfg.lr_time_decay * td);
  return cfg.lr_init * std::pow(cfg.lr_exp_decay, td);
}

}  // namespace loqi
