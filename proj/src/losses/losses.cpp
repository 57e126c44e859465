#include <cmath>
#include <string>

#include "loqi/core/errors.hpp"
#include "loqi/losses/losses.hpp"
#include "loqi/simd/kernels.hpp"

namespace loqi {
namespace {

void check_dims(const Descriptor& a, const Descriptor& b, const char* what) {
  if (a.size() != b.size()) {
    throw ValidationError(std::string(what) + ": descriptor lengths differ (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
  }
  if (a.size() == 0) throw ValidationError(std::string(what) + ": empty descriptor");
}

}  // namespace

void LossWeights::validate() const {
  if (!(std::isfinite(alpha) && alpha >= 0.0)) throw ValidationError("alpha must be finite and non-negative");
  if (!(std::isfinite(beta) && beta >= 0.0)) throw ValidationError("beta must be finite and non-negative");
  if (!(std::isfinite(margin) && margin >= 0.0)) throw ValidationError("margin must be finite and non-negative");
}

double mse_loss(const Descriptor& student, const Descriptor& teacher) {
  check_dims(student, teacher, "mse");
  return simd::squared_distance(student.data(), teacher.data());
}

MseGradient mse_loss_grad(const Descriptor& student, const Descriptor& teacher) {
  check_dims(student, teacher, "mse");
  MseGradient out;
  out.loss = simd::squared_distance(student.data(), teacher.data());
  out.d_student = Descriptor(student.size());
  for (std::size_t i = 0; i < student.size(); ++i) out.d_student[i] = 2.0 * (student[i] - teacher[i]);
  return out;
}

HardestPositive select_hardest_positive(const Descriptor& query, std::span<const Descriptor> positives) {
  if (positives.empty()) throw ValidationError("triplet loss needs at least one positive");
  HardestPositive best{0, 0.0};
  for (std::size_t i = 0; i < positives.size(); ++i) {
    check_dims(query, positives[i], "triplet");
    const double d = simd::squared_distance(query.data(), positives[i].data());
    if (i == 0 || d < best.squared_distance) best = {i, d};
  }
  return best;
}

double triplet_loss(const Descriptor& query, std::span<const Descriptor> positives,
                    std::span<const Descriptor> negatives, double margin) {
  if (negatives.empty()) throw ValidationError("triplet loss needs at least one negative");
  const HardestPositive hp = select_hardest_positive(query, positives);
  double loss = 0.0;
  for (const auto& neg : negatives) {
    check_dims(query, neg, "triplet");
    loss += std::max(hp.squared_distance - simd::squared_distance(query.data(), neg.data()) + margin, 0.0);
  }
  return loss;
}

TripletGradient triplet_loss_grad(const Descriptor& query, std::span<const Descriptor> positives,
                                  std::span<const Descriptor> negatives, double margin) {
  if (negatives.empty()) throw ValidationError("triplet loss needs at least one negative");
  const HardestPositive hp = select_hardest_positive(query, positives);
  const std::size_t d = query.size();
  const Descriptor& pos = positives[hp.index];

  TripletGradient out;
  out.positive_index = hp.index;
  out.d_query = Descriptor(d);
  out.d_positives.assign(positives.size(), Descriptor(d));
  out.d_negatives.assign(negatives.size(), Descriptor(d));
  for (std::size_t j = 0; j < negatives.size(); ++j) {
    const Descriptor& neg = negatives[j];
    check_dims(query, neg, "triplet");
    const double h = hp.squared_distance - simd::squared_distance(query.data(), neg.data()) + margin;
    if (h <= 0.0) continue;
    out.loss += h;
    ++out.active_negatives;
    for (std::size_t k = 0; k < d; ++k) {
      out.d_query[k] += 2.0 * (neg[k] - pos[k]);
      out.d_positives[hp.index][k] -= 2.0 * (query[k] - pos[k]);
      out.d_negatives[j][k] += 2.0 * (query[k] - neg[k]);
    }
  }
  return out;
}

double composite_loss(double ickd, double mse, double triplet, const LossWeights& weights) {
  return ickd + weights.alpha * mse + weights.beta * triplet;
}

}  // namespace loqi
