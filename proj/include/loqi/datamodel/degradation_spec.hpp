#pragma once

#include <string>
#include <string_view>
#include <variant>

namespace loqi {

struct JpegSpec {
  int quality = 10;
  friend bool operator==(const JpegSpec&, const JpegSpec&) = default;
};

struct ResizeSpec {
  int width = 0;
  int height = 0;
  friend bool operator==(const ResizeSpec&, const ResizeSpec&) = default;
};

struct VideoQpSpec {
  int qp = 30;
  std::string codec_profile = "high";
  friend bool operator==(const VideoQpSpec&, const VideoQpSpec&) = default;
};

/// Recorded transformation from a high-quality image to its degraded
/// counterpart.
struct DegradationSpec {
  std::variant<JpegSpec, ResizeSpec, VideoQpSpec> variant;

  static DegradationSpec jpeg(int quality);
  static DegradationSpec resize(int width, int height);
  static DegradationSpec video_qp(int qp, std::string codec_profile = "high");

  /// Throws ValidationError: quality in [1,100], resize dims >= 8, qp in [0,51].
  void validate() const;

  /// "jpeg:10", "resize:320x240", "videoqp:36" or "videoqp:36:baseline".
  std::string to_string() const;
  static DegradationSpec parse(std::string_view text);

  friend bool operator==(const DegradationSpec&, const DegradationSpec&) = default;
};

}  // namespace loqi
