#include <array>
#include <cmath>
#include <cstdlib>
#include <string>

#include "loqi/core/errors.hpp"
#include "loqi/core/image.hpp"

namespace loqi {

Image::Image(int width, int height) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw ValidationError("negative image dimensions");
  rgb_.assign(static_cast<std::size_t>(width) * height * 3, 0);
}

Image::Image(int width, int height, std::vector<std::uint8_t> rgb)
    : width_(width), height_(height), rgb_(std::move(rgb)) {
  if (width < 0 || height < 0) throw ValidationError("negative image dimensions");
  if (rgb_.size() != static_cast<std::size_t>(width) * height * 3) {
    throw ValidationError("pixel buffer size " + std::to_string(rgb_.size()) + " does not match " +
                          std::to_string(width) + "x" + std::to_string(height) + " RGB");
  }
}

double mean_absolute_error(const Image& a, const Image& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ValidationError("mean_absolute_error: dimension mismatch");
  }
  const auto da = a.data();
  const auto db = b.data();
  if (da.empty()) return 0.0;
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < da.size(); ++i) total += static_cast<std::uint64_t>(std::abs(int(da[i]) - int(db[i])));
  return static_cast<double>(total) / static_cast<double>(da.size());
}

std::array<double, 3> mean_color(const Image& img) {
  std::array<double, 3> sum{0.0, 0.0, 0.0};
  const auto d = img.data();
  for (std::size_t i = 0; i < d.size(); i += 3) {
    for (int c = 0; c < 3; ++c) sum[c] += d[i + c];
  }
  const double n = static_cast<double>(img.pixel_count());
  if (n > 0) {
    for (double& s : sum) s /= n;
  }
  return sum;
}

}  // namespace loqi
