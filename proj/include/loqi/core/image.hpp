#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace loqi {

/// Interleaved 8-bit RGB raster, row-major.
class Image {
 public:
  Image() = default;
  Image(int width, int height);
  Image(int width, int height, std::vector<std::uint8_t> rgb);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return width_ == 0 || height_ == 0; }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }

  std::uint8_t& at(int x, int y, int c) { return rgb_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c]; }
  std::uint8_t at(int x, int y, int c) const { return rgb_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c]; }

  std::span<std::uint8_t> data() noexcept { return rgb_; }
  std::span<const std::uint8_t> data() const noexcept { return rgb_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> rgb_;
};

/// Mean absolute per-channel difference in [0, 255]. Dimensions must match.
double mean_absolute_error(const Image& a, const Image& b);

/// Per-channel mean color.
std::array<double, 3> mean_color(const Image& img);

}  // namespace loqi
