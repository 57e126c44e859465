#include <algorithm>
#include <cmath>
#include <string>

#include "loqi/core/errors.hpp"
#include "loqi/losses/tensor.hpp"
#include "loqi/simd/kernels.hpp"

namespace loqi {

LatentCode::LatentCode(int channels, int height, int width)
    : channels_(channels), height_(height), width_(width) {
  if (channels < 0 || height < 0 || width < 0) throw ValidationError("negative latent dimensions");
  values_.assign(static_cast<std::size_t>(channels) * height * width, 0.0);
}

LatentCode::LatentCode(int channels, int height, int width, std::vector<double> values)
    : channels_(channels), height_(height), width_(width), values_(std::move(values)) {
  if (channels < 0 || height < 0 || width < 0) throw ValidationError("negative latent dimensions");
  if (values_.size() != static_cast<std::size_t>(channels) * height * width) {
    throw ValidationError("latent buffer of " + std::to_string(values_.size()) + " values does not match shape " +
                          std::to_string(channels) + "x" + std::to_string(height) + "x" + std::to_string(width));
  }
}

void LatentCode::validate() const {
  if (channels_ < 1) throw ValidationError("latent code needs at least one channel");
  if (spatial() < 1) throw ValidationError("latent code needs at least one spatial position");
  for (double v : values_) {
    if (!std::isfinite(v)) throw ValidationError("latent code has non-finite entries");
  }
}

double Descriptor::norm() const { return std::sqrt(simd::dot(data(), data())); }

Descriptor Descriptor::normalized() const {
  const double n = norm();
  Descriptor out(values_);
  if (n > 0.0) {
    for (double& v : out.values_) v /= n;
  }
  return out;
}

std::vector<float> Descriptor::to_float() const {
  std::vector<float> out(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) out[i] = static_cast<float>(values_[i]);
  return out;
}

double IccMatrix::frobenius_norm() const { return std::sqrt(simd::dot(data(), data())); }

double IccMatrix::max_asymmetry() const {
  double worst = 0.0;
  for (int i = 0; i < channels_; ++i) {
    for (int j = i + 1; j < channels_; ++j) worst = std::max(worst, std::abs(at(i, j) - at(j, i)));
  }
  return worst;
}

}  // namespace loqi
