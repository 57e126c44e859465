#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "loqi/core/image.hpp"
#include "loqi/datamodel/degradation_spec.hpp"
#include "loqi/datamodel/manifest.hpp"
#include "loqi/degrade/video.hpp"

namespace loqi {

struct JpegDegradeResult {
  Image image;                        // decode(encode(input, quality))
  std::vector<std::uint8_t> encoded;  // the JPEG bitstream
  std::string encoder;                // encoder identity and settings

  std::size_t encoded_bytes() const noexcept { return encoded.size(); }
};

JpegDegradeResult jpeg_degrade(const Image& image, int quality);

/// Bilinear resampling with half-pixel centers. Aspect ratio is not
/// preserved; both target axes are honoured exactly.
Image resize_degrade(const Image& image, int width, int height);

struct DegradeOptions {
  VideoCodecConfig video;
  Rational fps{30, 1};
};

/// Degrades every record of `manifest` into `out_dir` and writes
/// `out_dir/manifest.tsv`. Ids, poses and place ids are preserved; each
/// degraded record's source_path points at its high-quality original.
/// VideoQP treats the records, in manifest order, as one clip. On any
/// failure nothing is written to the manifest path and the error lists
/// every failed id.
DatasetManifest degrade_manifest(const DatasetManifest& manifest, const DegradationSpec& spec,
                                 const std::filesystem::path& out_dir, const DegradeOptions& options = {});

}  // namespace loqi
