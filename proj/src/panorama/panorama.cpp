#include <algorithm>
#include <cmath>
#include <numbers>

#include "loqi/core/errors.hpp"
#include "loqi/panorama/panorama.hpp"

namespace loqi {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

void check_fov(double fov_deg) {
  if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw ValidationError("field of view must be in (0, 180) degrees");
}

struct Camera {
  double focal;
  double cx, cy;
  double cos_p, sin_p, cos_y, sin_y;
  double scale_u, scale_v;

  Camera(int pano_w, int pano_h, double yaw_deg, double pitch_deg, double fov_deg, int out_w, int out_h)
      : focal((out_w / 2.0) / std::tan(fov_deg * kDeg / 2.0)),
        cx(out_w / 2.0),
        cy(out_h / 2.0),
        cos_p(std::cos(pitch_deg * kDeg)),
        sin_p(std::sin(pitch_deg * kDeg)),
        cos_y(std::cos(yaw_deg * kDeg)),
        sin_y(std::sin(yaw_deg * kDeg)),
        scale_u(pano_w / (2.0 * std::numbers::pi)),
        scale_v(pano_h / std::numbers::pi) {}

  PanoCoord map(double px, double py, int pano_w, int pano_h) const {
    const double x = (px + 0.5 - cx) / focal;
    const double y = (py + 0.5 - cy) / focal;
    const double z = 1.0;
    // pitch about the camera x axis (y points down)
    const double y1 = y * cos_p - z * sin_p;
    const double z1 = y * sin_p + z * cos_p;
    // yaw about the vertical axis
    const double x2 = x * cos_y + z1 * sin_y;
    const double z2 = -x * sin_y + z1 * cos_y;
    const double norm = std::sqrt(x2 * x2 + y1 * y1 + z2 * z2);
    const double lon = std::atan2(x2, z2);
    const double lat = std::asin(std::clamp(-y1 / norm, -1.0, 1.0));
    return {lon * scale_u + pano_w / 2.0 - 0.5, pano_h / 2.0 - lat * scale_v - 0.5};
  }
};

}  // namespace

void SliceSpec::validate() const {
  if (num_views < 1) throw ValidationError("num_views must be positive");
  check_fov(fov_deg);
  if (out_width < 1 || out_height < 1) throw ValidationError("output size must be positive");
  if (!(pitch_deg > -90.0 && pitch_deg < 90.0)) throw ValidationError("pitch must be in (-90, 90) degrees");
}

PanoCoord perspective_to_equirect(int pano_w, int pano_h, double yaw_deg, double pitch_deg, double fov_deg, int out_w,
                                  int out_h, double px, double py) {
  check_fov(fov_deg);
  return Camera(pano_w, pano_h, yaw_deg, pitch_deg, fov_deg, out_w, out_h).map(px, py, pano_w, pano_h);
}

Image equirect_to_perspective(const Image& pano, double yaw_deg, double pitch_deg, double fov_deg, int out_w,
                              int out_h) {
  const int W = pano.width();
  const int H = pano.height();
  if (H < 1 || W != 2 * H) throw ValidationError("equirectangular panorama must have width == 2 * height");
  check_fov(fov_deg);
  if (out_w < 1 || out_h < 1) throw ValidationError("output size must be positive");

  const Camera cam(W, H, yaw_deg, pitch_deg, fov_deg, out_w, out_h);
  Image out(out_w, out_h);
  for (int py = 0; py < out_h; ++py) {
    for (int px = 0; px < out_w; ++px) {
      const PanoCoord c = cam.map(px, py, W, H);
      const double v = std::clamp(c.v, 0.0, static_cast<double>(H - 1));
      const double u0f = std::floor(c.u);
      const double fu = c.u - u0f;
      const int v0 = static_cast<int>(std::floor(v));
      const int v1 = std::min(v0 + 1, H - 1);
      const double fv = v - v0;
      int u0 = static_cast<int>(u0f) % W;
      if (u0 < 0) u0 += W;
      const int u1 = (u0 + 1) % W;
      for (int ch = 0; ch < 3; ++ch) {
        const double top = pano.at(u0, v0, ch) * (1.0 - fu) + pano.at(u1, v0, ch) * fu;
        const double bottom = pano.at(u0, v1, ch) * (1.0 - fu) + pano.at(u1, v1, ch) * fu;
        const double val = top * (1.0 - fv) + bottom * fv;
        out.at(px, py, ch) = static_cast<std::uint8_t>(std::clamp(std::lround(val), 0L, 255L));
      }
    }
  }
  return out;
}

std::vector<std::vector<Image>> slice_panorama_video(std::span<const Image> frames, const SliceSpec& spec) {
  spec.validate();
  for (const auto& f : frames) {
    if (f.width() != frames.front().width() || f.height() != frames.front().height()) {
      throw ValidationError("panorama frames must share one size");
    }
    if (f.height() < 1 || f.width() != 2 * f.height()) {
      throw ValidationError("equirectangular panorama must have width == 2 * height");
    }
  }
  std::vector<std::vector<Image>> views(static_cast<std::size_t>(spec.num_views));
  for (int k = 0; k < spec.num_views; ++k) {
    auto& seq = views[static_cast<std::size_t>(k)];
    seq.reserve(frames.size());
    for (const auto& f : frames) {
      seq.push_back(equirect_to_perspective(f, spec.view_yaw_deg(k), spec.pitch_deg, spec.fov_deg, spec.out_width,
                                            spec.out_height));
    }
  }
  return views;
}

}  // namespace loqi
