#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "loqi/losses/tensor.hpp"

namespace loqi {

struct LossWeights {
  double alpha = 1e5;   // MSE weight
  double beta = 1e4;    // triplet weight
  double margin = 0.1;  // triplet hinge margin

  void validate() const;
};

// ---------------------------------------------------------------------------
// Inter-channel correlation

/// Flattens z to c x (h*w), scales every channel row to unit L2 norm
/// (zero rows stay zero), forms the Gram matrix C of the rows and returns
/// C / ||C||_F. Throws ValidationError for an all-zero latent.
IccMatrix compute_icc(const LatentCode& z);

/// Frobenius norm of the difference of the two ICC matrices. Spatial
/// sizes may differ; channel counts must match.
double ickd_loss(const LatentCode& student, const LatentCode& teacher);
double ickd_loss(const LatentCode& student, const IccMatrix& teacher_icc);

struct IckdGradient {
  double loss = 0.0;
  LatentCode d_student;  // dL/dz_student, same shape as the input
};

/// Loss plus analytic gradient w.r.t. the student latent. At loss == 0 the
/// (sub)gradient returned is zero; zero channel rows receive zero gradient.
IckdGradient ickd_loss_grad(const LatentCode& student, const IccMatrix& teacher_icc);

// ---------------------------------------------------------------------------
// Descriptor losses

/// Sum of squared component differences (no division by the length).
double mse_loss(const Descriptor& student, const Descriptor& teacher);

struct MseGradient {
  double loss = 0.0;
  Descriptor d_student;
};
MseGradient mse_loss_grad(const Descriptor& student, const Descriptor& teacher);

struct HardestPositive {
  std::size_t index = 0;
  double squared_distance = 0.0;
};

/// Positive closest to the query; ties resolve to the lowest index.
HardestPositive select_hardest_positive(const Descriptor& query, std::span<const Descriptor> positives);

/// sum_j max(min_i d2(q, p_i) - d2(q, n_j) + margin, 0).
double triplet_loss(const Descriptor& query, std::span<const Descriptor> positives,
                    std::span<const Descriptor> negatives, double margin);

struct TripletGradient {
  double loss = 0.0;
  std::size_t positive_index = 0;
  std::size_t active_negatives = 0;
  Descriptor d_query;
  std::vector<Descriptor> d_positives;  // nonzero only at positive_index
  std::vector<Descriptor> d_negatives;
};
TripletGradient triplet_loss_grad(const Descriptor& query, std::span<const Descriptor> positives,
                                  std::span<const Descriptor> negatives, double margin);

/// l_ickd + alpha * l_mse + beta * l_triplet.
double composite_loss(double ickd, double mse, double triplet, const LossWeights& weights);

}  // namespace loqi
