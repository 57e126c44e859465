#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "loqi/core/image.hpp"

namespace loqi {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Decodes PNG, JPEG or binary PPM (P6), detected from the file's magic bytes.
Image read_image(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const Image& img);

/// Baseline JPEG through the linked libjpeg: 4:2:0 chroma subsampling,
/// integer slow DCT, standard Huffman tables. Quality in [1, 100].
std::vector<std::uint8_t> encode_jpeg(const Image& img, int quality);
Image decode_jpeg(std::span<const std::uint8_t> bytes);

/// Encoder build plus settings, e.g. "libjpeg-turbo 2.1.2 (jpeg8) islow 4:2:0 baseline".
std::string jpeg_encoder_identity();

}  // namespace loqi
