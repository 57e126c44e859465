#include <algorithm>
#include <cmath>
#include <numbers>

#include "loqi/core/errors.hpp"
#include "loqi/datamodel/geo.hpp"

namespace loqi {

std::string to_string(PoseMode mode) {
  switch (mode) {
    case PoseMode::latlon:
      return "latlon";
    case PoseMode::utm:
      return "utm";
    case PoseMode::frame_index:
      return "frame";
  }
  return "unknown";
}

GeoPose GeoPose::latlon(double lat_deg, double lon_deg) {
  GeoPose p;
  p.mode = PoseMode::latlon;
  p.first = lat_deg;
  p.second = lon_deg;
  p.validate();
  return p;
}

GeoPose GeoPose::utm(double easting, double northing, std::string zone) {
  GeoPose p;
  p.mode = PoseMode::utm;
  p.first = easting;
  p.second = northing;
  p.zone = std::move(zone);
  p.validate();
  return p;
}

GeoPose GeoPose::frame_index(std::int64_t index) {
  GeoPose p;
  p.mode = PoseMode::frame_index;
  p.frame = index;
  p.validate();
  return p;
}

void GeoPose::validate() const {
  switch (mode) {
    case PoseMode::latlon:
      if (!(first >= -90.0 && first <= 90.0)) throw ValidationError("latitude out of [-90, 90]");
      if (!(second >= -180.0 && second <= 180.0)) throw ValidationError("longitude out of [-180, 180]");
      break;
    case PoseMode::utm:
      if (!std::isfinite(first) || !std::isfinite(second)) throw ValidationError("non-finite UTM coordinate");
      break;
    case PoseMode::frame_index:
      if (frame < 0) throw ValidationError("frame index must be >= 0");
      break;
  }
}

double geodesic_distance(const GeoPose& a, const GeoPose& b) {
  if (a.mode != b.mode) {
    throw ValidationError("pose mode mismatch: " + to_string(a.mode) + " vs " + to_string(b.mode));
  }
  switch (a.mode) {
    case PoseMode::latlon: {
      constexpr double deg = std::numbers::pi / 180.0;
      const double phi1 = a.first * deg;
      const double phi2 = b.first * deg;
      const double dphi = (b.first - a.first) * deg;
      const double dlambda = (b.second - a.second) * deg;
      const double s1 = std::sin(dphi / 2.0);
      const double s2 = std::sin(dlambda / 2.0);
      const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
      return 2.0 * kEarthRadiusMeters * std::asin(std::sqrt(std::min(1.0, h)));
    }
    case PoseMode::utm:
      if (a.zone != b.zone) throw ValidationError("UTM zone mismatch: " + a.zone + " vs " + b.zone);
      return std::hypot(b.first - a.first, b.second - a.second);
    case PoseMode::frame_index:
      return static_cast<double>(a.frame > b.frame ? a.frame - b.frame : b.frame - a.frame);
  }
  return 0.0;
}

}  // namespace loqi
