#pragma once

#include <span>
#include <vector>

#include "loqi/core/image.hpp"

namespace loqi {

/// Horizon ring of perspective views cut from an equirectangular frame.
struct SliceSpec {
  int num_views = 18;
  double fov_deg = 90.0;  // horizontal
  int out_width = 1440;
  int out_height = 810;
  double pitch_deg = 0.0;

  void validate() const;
  double yaw_step_deg() const noexcept { return 360.0 / num_views; }
  double view_yaw_deg(int k) const noexcept { return k * yaw_step_deg(); }
  /// Adjacent views overlap or touch, so no yaw direction is left uncovered.
  bool covers_full_circle() const noexcept { return fov_deg >= yaw_step_deg(); }
};

struct PanoCoord {
  double u;  // column, pixel centers at integers, wraps modulo W
  double v;  // row, pixel centers at integers
};

/// Panorama coordinate sampled by output pixel (px, py) of a pinhole
/// camera with horizontal field of view `fov_deg`, rotated by pitch
/// (positive looks up) and then yaw (positive turns towards larger u).
PanoCoord perspective_to_equirect(int pano_width, int pano_height, double yaw_deg, double pitch_deg, double fov_deg,
                                  int out_width, int out_height, double px, double py);

/// Requires W == 2H and fov in (0, 180). Bilinear sampling with
/// longitudinal wrap-around.
Image equirect_to_perspective(const Image& pano, double yaw_deg, double pitch_deg, double fov_deg, int out_width,
                              int out_height);

/// views[k][t] is view k (yaw k * 360/num_views) of frame t.
std::vector<std::vector<Image>> slice_panorama_video(std::span<const Image> frames, const SliceSpec& spec);

}  // namespace loqi
