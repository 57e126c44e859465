#pragma once

#include <array>
#include <cstdint>

#include "loqi/core/image.hpp"
#include "loqi/visualize/activation.hpp"

namespace loqi {

/// Viridis colormap; t is clamped to [0, 1].
std::array<std::uint8_t, 3> viridis(double t);

/// Map resampled to width x height: bilinear for latent-grid maps,
/// nearest patch center for occlusion maps.
std::vector<double> resample_map(const ActivationMap& map, int width, int height);

/// Colormapped map alpha-blended over `base`:
/// out = (1 - alpha) * base + alpha * viridis(map).
Image render_overlay(const Image& base, const ActivationMap& map, double alpha = 0.5);

}  // namespace loqi
