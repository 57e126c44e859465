#include "loqi/visualize/overlay.hpp"

#include <algorithm>
#include <cmath>

#include "loqi/core/errors.hpp"

namespace loqi {
namespace {

constexpr std::uint8_t kViridis[9][3] = {
    {68, 1, 84},    {71, 44, 122},  {59, 81, 139},  {44, 113, 142}, {33, 144, 141},
    {39, 173, 129}, {92, 200, 99},  {170, 220, 50}, {253, 231, 37},
};

}  // namespace

std::array<std::uint8_t, 3> viridis(double t) {
  if (!std::isfinite(t)) t = 0.0;
  t = std::clamp(t, 0.0, 1.0) * 8.0;
  const int i = std::min(static_cast<int>(t), 7);
  const double f = t - i;
  std::array<std::uint8_t, 3> out{};
  for (int c = 0; c < 3; ++c) {
    out[c] = static_cast<std::uint8_t>(std::lround(kViridis[i][c] * (1.0 - f) + kViridis[i + 1][c] * f));
  }
  return out;
}

std::vector<double> resample_map(const ActivationMap& map, int width, int height) {
  if (map.width < 1 || map.height < 1) throw ValidationError("empty activation map");
  if (width < 1 || height < 1) throw ValidationError("overlay size must be positive");
  std::vector<double> out(static_cast<std::size_t>(width) * height);
  if (map.source == MapSource::occlusion && map.stride > 0) {
    for (int y = 0; y < height; ++y) {
      const double cy = (y + 0.5 - map.patch_size / 2.0) / map.stride;
      const int gy = std::clamp(static_cast<int>(std::lround(cy)), 0, map.height - 1);
      for (int x = 0; x < width; ++x) {
        const double cx = (x + 0.5 - map.patch_size / 2.0) / map.stride;
        const int gx = std::clamp(static_cast<int>(std::lround(cx)), 0, map.width - 1);
        out[static_cast<std::size_t>(y) * width + x] = map.at(gx, gy);
      }
    }
    return out;
  }
  const double sx = static_cast<double>(map.width) / width;
  const double sy = static_cast<double>(map.height) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(map.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, map.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(map.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, map.width - 1);
      const double wx = fx - x0;
      const double top = map.at(x0, y0) * (1 - wx) + map.at(x1, y0) * wx;
      const double bot = map.at(x0, y1) * (1 - wx) + map.at(x1, y1) * wx;
      out[static_cast<std::size_t>(y) * width + x] = top * (1 - wy) + bot * wy;
    }
  }
  return out;
}

Image render_overlay(const Image& base, const ActivationMap& map, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("overlay alpha must be in [0, 1]");
  if (base.empty()) throw ValidationError("overlay needs a non-empty base image");
  const auto values = resample_map(map, base.width(), base.height());
  Image out(base.width(), base.height());
  for (int y = 0; y < base.height(); ++y) {
    for (int x = 0; x < base.width(); ++x) {
      const auto col = viridis(values[static_cast<std::size_t>(y) * base.width() + x]);
      for (int c = 0; c < 3; ++c) {
        const double v = (1.0 - alpha) * base.at(x, y, c) + alpha * col[c];
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

}  // namespace loqi
