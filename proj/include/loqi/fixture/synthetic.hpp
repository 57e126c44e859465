#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "loqi/core/image.hpp"
#include "loqi/datamodel/manifest.hpp"

namespace loqi {

/// Procedural places on a UTM grid. Each place is a random composition of
/// gradients and shapes; its views are shifted, re-lit and noised crops of
/// that composition, taken at poses jittered around the place center.
struct SceneFixtureOptions {
  int places = 64;
  int views = 4;
  int width = 64;
  int height = 64;
  double spacing_m = 100.0;
  double jitter_m = 3.0;
  int max_shift_px = 6;
  double noise_sigma = 4.0;
  // Multiplies every grating period.
  double texture_scale = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

Image render_place_view(const SceneFixtureOptions& options, int place, int view);
GeoPose place_view_pose(const SceneFixtureOptions& options, int place, int view);

struct SceneFixture {
  std::filesystem::path database;  // view 0 of every place
  std::filesystem::path queries;   // view 1
  std::filesystem::path train;     // views 2 and up
};

/// Writes PNGs under dir/images and three manifests (database.tsv,
/// queries.tsv, train.tsv) under dir.
SceneFixture write_scene_fixture(const std::filesystem::path& dir, const SceneFixtureOptions& options);

/// Panning textured clip for encoder sweeps.
std::vector<Image> make_textured_clip(int width, int height, int frames, std::uint64_t seed);

/// Equirectangular frame (width == 2 * height) whose hue in degrees is
/// (longitude + hue_offset_deg) mod 360, with longitude 0 at the center
/// column; fully saturated, value 1.
Image make_hue_panorama(int width, int height, double hue_offset_deg = 10.0);

std::array<std::uint8_t, 3> hsv_to_rgb(double hue_deg, double saturation, double value);
/// Hue in [0, 360); 0 for grays.
double rgb_hue(std::uint8_t r, std::uint8_t g, std::uint8_t b);

}  // namespace loqi
