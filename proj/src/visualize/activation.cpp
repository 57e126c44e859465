#include "loqi/visualize/activation.hpp"

#include <algorithm>
#include <cmath>

#include "loqi/core/errors.hpp"
#include "loqi/simd/kernels.hpp"

namespace loqi {

std::string to_string(MapSource s) {
  switch (s) {
    case MapSource::channel_mean:
      return "channel-mean";
    case MapSource::cluster_weighted:
      return "cluster";
    case MapSource::occlusion:
      return "occlusion";
  }
  return "?";
}

MapSource parse_map_source(const std::string& text) {
  if (text == "channel-mean" || text == "channel_mean") return MapSource::channel_mean;
  if (text == "cluster" || text == "cluster-weighted" || text == "cluster_weighted") return MapSource::cluster_weighted;
  if (text == "occlusion") return MapSource::occlusion;
  throw ValidationError("unknown activation method '" + text + "' (expected channel-mean, cluster, occlusion)");
}

void normalize_min_max(std::vector<double>& values) {
  if (values.empty()) return;
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError("activation map has non-finite values");
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double a = *lo;
  const double range = *hi - a;
  if (!(range > 0.0)) {
    std::fill(values.begin(), values.end(), 0.0);
    return;
  }
  for (double& v : values) v = (v - a) / range;
}

ActivationMap channel_mean_map(const LatentCode& z) {
  z.validate();
  ActivationMap m;
  m.width = z.width();
  m.height = z.height();
  m.source = MapSource::channel_mean;
  m.data.assign(z.spatial(), 0.0);
  for (int c = 0; c < z.channels(); ++c) simd::axpy(1.0 / z.channels(), z.channel(c), m.data);
  normalize_min_max(m.data);
  return m;
}

ActivationMap cluster_weighted_map(const LatentCode& z, const LatentCode& weights) {
  z.validate();
  if (weights.channels() != z.channels() || weights.height() != z.height() || weights.width() != z.width()) {
    throw ValidationError("assignment weights must have the latent's shape");
  }
  weights.validate();
  const std::size_t P = z.spatial();
  ActivationMap m;
  m.width = z.width();
  m.height = z.height();
  m.source = MapSource::cluster_weighted;
  m.data.assign(P, 0.0);
  for (std::size_t p = 0; p < P; ++p) {
    double wsum = 0.0, acc = 0.0;
    for (int c = 0; c < z.channels(); ++c) {
      const double w = weights.data()[c * P + p];
      wsum += w;
      acc += w * z.data()[c * P + p];
    }
    if (std::abs(wsum - 1.0) > 1e-5) {
      throw ValidationError("assignment weights at position " + std::to_string(p) + " sum to " +
                            std::to_string(wsum) + ", expected 1");
    }
    m.data[p] = acc;
  }
  normalize_min_max(m.data);
  return m;
}

ActivationMap cluster_weighted_map(const LatentCode& z, const std::function<LatentCode(const LatentCode&)>& assign) {
  return cluster_weighted_map(z, assign(z));
}

ActivationMap occlusion_map(const ExtractorHandle& handle, const Image& image, const OcclusionOptions& opt) {
  if (opt.patch_size < 1 || opt.stride < 1) throw ValidationError("patch size and stride must be >= 1");
  if (opt.patch_size > image.width() || opt.patch_size > image.height()) {
    throw ValidationError("occlusion patch of " + std::to_string(opt.patch_size) + " px does not fit a " +
                          std::to_string(image.width()) + "x" + std::to_string(image.height()) + " image");
  }
  const int nx = (image.width() - opt.patch_size) / opt.stride + 1;
  const int ny = (image.height() - opt.patch_size) / opt.stride + 1;
  const auto mean = mean_color(image);
  std::uint8_t fill[3];
  for (int c = 0; c < 3; ++c) fill[c] = static_cast<std::uint8_t>(std::clamp(std::lround(mean[c]), 0L, 255L));

  const Descriptor base = handle.describe(image);
  ActivationMap m;
  m.width = nx;
  m.height = ny;
  m.source = MapSource::occlusion;
  m.patch_size = opt.patch_size;
  m.stride = opt.stride;
  m.data.assign(static_cast<std::size_t>(nx) * ny, 0.0);
  Image masked = image;
  for (int gy = 0; gy < ny; ++gy) {
    for (int gx = 0; gx < nx; ++gx) {
      const int x0 = gx * opt.stride, y0 = gy * opt.stride;
      for (int y = y0; y < y0 + opt.patch_size; ++y) {
        for (int x = x0; x < x0 + opt.patch_size; ++x) {
          for (int c = 0; c < 3; ++c) masked.at(x, y, c) = fill[c];
        }
      }
      const Descriptor d = handle.describe(masked);
      m.data[static_cast<std::size_t>(gy) * nx + gx] = std::sqrt(simd::squared_distance(base.data(), d.data()));
      for (int y = y0; y < y0 + opt.patch_size; ++y) {
        for (int x = x0; x < x0 + opt.patch_size; ++x) {
          for (int c = 0; c < 3; ++c) masked.at(x, y, c) = image.at(x, y, c);
        }
      }
    }
  }
  normalize_min_max(m.data);
  return m;
}

}  // namespace loqi
