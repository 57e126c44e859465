#pragma once

#include <functional>
#include <string>
#include <vector>

#include "loqi/core/image.hpp"
#include "loqi/losses/tensor.hpp"
#include "loqi/model/extractor.hpp"

namespace loqi {

enum class MapSource { channel_mean, cluster_weighted, occlusion };

std::string to_string(MapSource s);
MapSource parse_map_source(const std::string& text);

/// Non-negative 2D map, min-max normalized to [0, 1] (constant maps are
/// all zeros). Row-major.
struct ActivationMap {
  int width = 0;
  int height = 0;
  std::vector<double> data;
  MapSource source = MapSource::channel_mean;
  std::string image_id;
  // Occlusion geometry in input pixels; 0 for latent-grid maps.
  int patch_size = 0;
  int stride = 0;

  double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

/// In place; non-finite input is a NumericError.
void normalize_min_max(std::vector<double>& values);

ActivationMap channel_mean_map(const LatentCode& z);

/// `weights` has the latent's shape and sums to 1 over channels at each
/// position (within 1e-5).
ActivationMap cluster_weighted_map(const LatentCode& z, const LatentCode& weights);
ActivationMap cluster_weighted_map(const LatentCode& z, const std::function<LatentCode(const LatentCode&)>& assign);

struct OcclusionOptions {
  int patch_size = 32;
  int stride = 32;
};

/// Grid of ((W - patch) / stride + 1) x ((H - patch) / stride + 1) cells;
/// each holds the L2 change of the descriptor when that patch is filled
/// with the image's mean color.
ActivationMap occlusion_map(const ExtractorHandle& handle, const Image& image, const OcclusionOptions& options = {});

}  // namespace loqi
