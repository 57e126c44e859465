#pragma once

#include <cstdint>
#include <string>

namespace loqi {

enum class PoseMode { latlon, utm, frame_index };

std::string to_string(PoseMode mode);

inline constexpr double kEarthRadiusMeters = 6'371'000.0;

/// Geographic pose of an image. Only the fields of `mode` are meaningful.
struct GeoPose {
  PoseMode mode = PoseMode::latlon;
  double first = 0.0;   // latitude (deg) or easting (m)
  double second = 0.0;  // longitude (deg) or northing (m)
  std::string zone;     // UTM zone label, e.g. "18T"; may be empty
  std::int64_t frame = 0;

  static GeoPose latlon(double lat_deg, double lon_deg);
  static GeoPose utm(double easting, double northing, std::string zone = {});
  static GeoPose frame_index(std::int64_t index);

  double latitude() const noexcept { return first; }
  double longitude() const noexcept { return second; }
  double easting() const noexcept { return first; }
  double northing() const noexcept { return second; }

  /// Throws ValidationError on out-of-range coordinates.
  void validate() const;

  friend bool operator==(const GeoPose&, const GeoPose&) = default;
};

/// Meters for latlon (haversine on a sphere of kEarthRadiusMeters) and utm
/// (planar), frames for frame_index. Throws ValidationError on mode or
/// UTM zone mismatch.
double geodesic_distance(const GeoPose& a, const GeoPose& b);

}  // namespace loqi
