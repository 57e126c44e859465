#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace loqi {

/// Channels-first 3D feature map emitted by an encoder. Channel c is the
/// contiguous row data()[c * spatial() .. (c + 1) * spatial()), stored
/// row-major over (height, width).
class LatentCode {
 public:
  LatentCode() = default;
  LatentCode(int channels, int height, int width);
  LatentCode(int channels, int height, int width, std::vector<double> values);

  int channels() const noexcept { return channels_; }
  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t spatial() const noexcept { return static_cast<std::size_t>(height_) * width_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& at(int c, int y, int x) { return values_[index(c, y, x)]; }
  double at(int c, int y, int x) const { return values_[index(c, y, x)]; }

  std::span<double> channel(int c) { return std::span<double>(values_).subspan(c * spatial(), spatial()); }
  std::span<const double> channel(int c) const {
    return std::span<const double>(values_).subspan(c * spatial(), spatial());
  }

  std::span<double> data() noexcept { return values_; }
  std::span<const double> data() const noexcept { return values_; }

  /// Throws ValidationError unless c >= 1, spatial >= 1 and every entry is finite.
  void validate() const;

  friend bool operator==(const LatentCode&, const LatentCode&) = default;

 private:
  std::size_t index(int c, int y, int x) const noexcept {
    return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
  }

  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<double> values_;
};

/// Global image descriptor.
class Descriptor {
 public:
  Descriptor() = default;
  explicit Descriptor(std::size_t dim) : values_(dim, 0.0) {}
  explicit Descriptor(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t size() const noexcept { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<double> data() noexcept { return values_; }
  std::span<const double> data() const noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  double norm() const;
  /// Copy scaled to unit L2 norm; a zero vector stays zero.
  Descriptor normalized() const;
  std::vector<float> to_float() const;

  friend bool operator==(const Descriptor&, const Descriptor&) = default;

 private:
  std::vector<double> values_;
};

/// c x c inter-channel correlation matrix, row-major.
class IccMatrix {
 public:
  IccMatrix() = default;
  explicit IccMatrix(int channels) : channels_(channels), values_(static_cast<std::size_t>(channels) * channels, 0.0) {}

  int channels() const noexcept { return channels_; }
  double& at(int i, int j) { return values_[static_cast<std::size_t>(i) * channels_ + j]; }
  double at(int i, int j) const { return values_[static_cast<std::size_t>(i) * channels_ + j]; }
  std::span<const double> data() const noexcept { return values_; }
  std::span<double> data() noexcept { return values_; }

  double frobenius_norm() const;
  double max_asymmetry() const;

 private:
  int channels_ = 0;
  std::vector<double> values_;
};

}  // namespace loqi
