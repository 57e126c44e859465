#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "loqi/core/image.hpp"
#include "loqi/datamodel/degradation_spec.hpp"

namespace loqi {

struct Rational {
  int num = 30;
  int den = 1;

  double value() const noexcept { return static_cast<double>(num) / den; }
  std::string to_string() const { return std::to_string(num) + "/" + std::to_string(den); }
  static Rational parse(const std::string& text);

  friend bool operator==(const Rational&, const Rational&) = default;
};

struct BitrateRecord {
  DegradationSpec spec;
  std::uint64_t total_bytes = 0;  // size of the encoded container
  double duration_s = 0.0;        // frame_count / fps
  double bitrate_bps = 0.0;       // total_bytes * 8 / duration_s
  Rational fps;
  std::size_t frame_count = 0;
  std::string encoder;
};

std::string to_json(const BitrateRecord& record);
BitrateRecord bitrate_record_from_json(const std::string& text);

/// Command templates for the external encoder. Placeholders:
/// {ffmpeg} {width} {height} {fps} {qp} {profile} {input} {output}.
struct VideoCodecConfig {
  static const char* const kDefaultEncodeTemplate;
  static const char* const kDefaultDecodeTemplate;

  // Empty: take LOQI_FFMPEG from the environment, then `ffmpeg` on PATH.
  std::string ffmpeg;
  std::string encode_template = kDefaultEncodeTemplate;
  std::string decode_template = kDefaultDecodeTemplate;
  std::string container_extension = "mp4";
};

/// Absolute path of the encoder binary. Throws EnvironmentError with a
/// remediation hint when none can be found.
std::filesystem::path resolve_ffmpeg(const VideoCodecConfig& config);

/// First line of `ffmpeg -version` plus the codec settings.
std::string video_encoder_identity(const VideoCodecConfig& config, const VideoQpSpec& spec);

struct VideoRoundTrip {
  std::vector<Image> frames;
  BitrateRecord bitrate;
};

/// H.264 constant-QP encode of `frames` (yuv420p, default GOP), then
/// decode back to RGB. Odd dimensions are padded for encoding and cropped
/// on decode. QP 0 (lossless) requires the high444 profile.
VideoRoundTrip video_quantize_roundtrip(std::span<const Image> frames, const VideoQpSpec& spec,
                                        Rational fps = {30, 1}, const VideoCodecConfig& config = {});

}  // namespace loqi
