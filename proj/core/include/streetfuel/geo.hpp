#pragma once

#include <cmath>
#include <numbers>

namespace streetfuel {

/// Earth radius used by every haversine computation in the project.
inline constexpr double kEarthRadiusM = 6'371'000.0;

/// WGS84 position in decimal degrees.
struct LatLon {
  double lat{0.0};
  double lon{0.0};
};

inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

/// Great-circle distance in meters between two positions.
inline double haversine_m(const LatLon& a, const LatLon& b) {
  const double phi1 = deg2rad(a.lat);
  const double phi2 = deg2rad(b.lat);
  const double dphi = deg2rad(b.lat - a.lat);
  const double dlam = deg2rad(b.lon - a.lon);
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlam / 2.0);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

/// Meters spanned by one degree of latitude.
inline double meters_per_degree_lat() {
  return std::numbers::pi * kEarthRadiusM / 180.0;
}

/// Meters spanned by one degree of longitude at the given latitude.
inline double meters_per_degree_lon(double lat_deg) {
  return meters_per_degree_lat() * std::cos(deg2rad(lat_deg));
}

/// Linear interpolation between two positions, t in [0, 1].
inline LatLon lerp(const LatLon& a, const LatLon& b, double t) {
  return {a.lat + (b.lat - a.lat) * t, a.lon + (b.lon - a.lon) * t};
}

inline bool valid_position(const LatLon& p) {
  return p.lat >= -90.0 && p.lat <= 90.0 && p.lon >= -180.0 && p.lon <= 180.0;
}

/// Axis-aligned lat/lon rectangle, inclusive bounds.
struct BBox {
  double min_lat{-90.0};
  double min_lon{-180.0};
  double max_lat{90.0};
  double max_lon{180.0};

  bool contains(const LatLon& p) const {
    return p.lat >= min_lat && p.lat <= max_lat && p.lon >= min_lon &&
           p.lon <= max_lon;
  }
};

}  // namespace streetfuel
