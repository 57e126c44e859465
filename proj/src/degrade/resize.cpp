#include <algorithm>
#include <cmath>
#include <vector>

#include "loqi/core/errors.hpp"
#include "loqi/degrade/degrade.hpp"

namespace loqi {
namespace {

struct Tap {
  int lo;
  int hi;
  double w;  // weight of hi
};

std::vector<Tap> taps(int src, int dst) {
  std::vector<Tap> out(static_cast<std::size_t>(dst));
  const double scale = static_cast<double>(src) / dst;
  for (int i = 0; i < dst; ++i) {
    double s = (i + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src - 1));
    const int lo = static_cast<int>(std::floor(s));
    const int hi = std::min(lo + 1, src - 1);
    out[static_cast<std::size_t>(i)] = {lo, hi, s - lo};
  }
  return out;
}

}  // namespace

Image resize_degrade(const Image& image, int width, int height) {
  if (width <= 0 || height <= 0) throw ValidationError("resize target dimensions must be positive");
  if (width < 8 || height < 8) throw ValidationError("resize target must be at least 8x8");
  if (image.empty()) throw ValidationError("cannot resize an empty image");

  const auto xs = taps(image.width(), width);
  const auto ys = taps(image.height(), height);
  Image out(width, height);
  for (int y = 0; y < height; ++y) {
    const Tap& ty = ys[static_cast<std::size_t>(y)];
    for (int x = 0; x < width; ++x) {
      const Tap& tx = xs[static_cast<std::size_t>(x)];
      for (int c = 0; c < 3; ++c) {
        const double top = image.at(tx.lo, ty.lo, c) * (1.0 - tx.w) + image.at(tx.hi, ty.lo, c) * tx.w;
        const double bottom = image.at(tx.lo, ty.hi, c) * (1.0 - tx.w) + image.at(tx.hi, ty.hi, c) * tx.w;
        const double v = top * (1.0 - ty.w) + bottom * ty.w;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

}  // namespace loqi
