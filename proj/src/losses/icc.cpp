#include <cmath>
#include <string>
#include <vector>

#include "loqi/core/errors.hpp"
#include "loqi/losses/losses.hpp"
#include "loqi/simd/kernels.hpp"

namespace loqi {
namespace {

struct NormalizedRows {
  std::vector<double> rows;   // c x n, unit rows (zero rows kept zero)
  std::vector<double> norms;  // original row norms
  std::size_t n = 0;

  std::span<const double> row(int i) const { return std::span<const double>(rows).subspan(i * n, n); }
};

NormalizedRows normalize_rows(const LatentCode& z) {
  z.validate();
  NormalizedRows out;
  out.n = z.spatial();
  out.rows.assign(z.data().begin(), z.data().end());
  out.norms.resize(static_cast<std::size_t>(z.channels()));
  for (int i = 0; i < z.channels(); ++i) {
    std::span<double> r = std::span<double>(out.rows).subspan(i * out.n, out.n);
    const double norm = std::sqrt(simd::dot(std::span<const double>(r), std::span<const double>(r)));
    out.norms[static_cast<std::size_t>(i)] = norm;
    if (norm > 0.0) {
      for (double& v : r) v /= norm;
    }
  }
  return out;
}

// Returns ||C||_F and leaves the normalized matrix in `icc`.
double gram_normalized(const NormalizedRows& rows, int c, IccMatrix& icc) {
  icc = IccMatrix(c);
  for (int i = 0; i < c; ++i) {
    for (int j = i; j <= c - 1; ++j) {
      const double v = simd::dot(rows.row(i), rows.row(j));
      icc.at(i, j) = v;
      icc.at(j, i) = v;
    }
  }
  const double s = icc.frobenius_norm();
  if (!(s > 0.0)) throw ValidationError("inter-channel correlation is undefined for an all-zero latent code");
  for (double& v : icc.data()) v /= s;
  return s;
}

void check_channels(int student, int teacher) {
  if (student != teacher) {
    throw ValidationError("ICKD needs equal channel counts, got " + std::to_string(student) + " and " +
                          std::to_string(teacher));
  }
}

}  // namespace

IccMatrix compute_icc(const LatentCode& z) {
  const NormalizedRows rows = normalize_rows(z);
  IccMatrix icc;
  gram_normalized(rows, z.channels(), icc);
  return icc;
}

double ickd_loss(const LatentCode& student, const IccMatrix& teacher_icc) {
  check_channels(student.channels(), teacher_icc.channels());
  const IccMatrix s = compute_icc(student);
  return std::sqrt(simd::squared_distance(s.data(), teacher_icc.data()));
}

double ickd_loss(const LatentCode& student, const LatentCode& teacher) {
  check_channels(student.channels(), teacher.channels());
  return ickd_loss(student, compute_icc(teacher));
}

IckdGradient ickd_loss_grad(const LatentCode& student, const IccMatrix& teacher_icc) {
  const int c = student.channels();
  check_channels(c, teacher_icc.channels());
  const NormalizedRows rows = normalize_rows(student);
  IccMatrix icc;
  const double s = gram_normalized(rows, c, icc);

  IckdGradient out;
  out.loss = std::sqrt(simd::squared_distance(icc.data(), teacher_icc.data()));
  out.d_student = LatentCode(c, student.height(), student.width());
  if (out.loss == 0.0) return out;

  // dL/dC_hat
  std::vector<double> g(icc.data().size());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = (icc.data()[k] - teacher_icc.data()[k]) / out.loss;
  // through C_hat = C / ||C||_F
  const double gc = simd::dot(std::span<const double>(g), icc.data());
  std::vector<double> h(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) h[k] = (g[k] - gc * icc.data()[k]) / s;

  // through C = P_hat P_hat^T, then the per-row normalization
  const std::size_t n = rows.n;
  std::vector<double> dphat(n);
  for (int i = 0; i < c; ++i) {
    const double r = rows.norms[static_cast<std::size_t>(i)];
    if (r == 0.0) continue;
    std::fill(dphat.begin(), dphat.end(), 0.0);
    for (int j = 0; j < c; ++j) {
      const double w = h[static_cast<std::size_t>(i) * c + j] + h[static_cast<std::size_t>(j) * c + i];
      if (w != 0.0) simd::axpy(w, rows.row(j), dphat);
    }
    const double proj = simd::dot(std::span<const double>(dphat), rows.row(i));
    std::span<double> dz = out.d_student.channel(i);
    const std::span<const double> phat = rows.row(i);
    for (std::size_t k = 0; k < n; ++k) dz[k] = (dphat[k] - proj * phat[k]) / r;
  }
  return out;
}

}  // namespace loqi
