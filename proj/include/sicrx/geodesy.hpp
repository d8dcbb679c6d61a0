#pragma once

#include <array>

#include "sicrx/common.hpp"

namespace sicrx {

using Vec3 = std::array<double, 3>;

struct Geodetic {
  double lat_rad = 0.0;
  double lon_rad = 0.0;
  double height_m = 0.0;
};

struct UtmCoord {
  double easting = 0.0;   // m
  double northing = 0.0;  // m
  int zone = 0;           // 1..60
  bool north = true;
};

Vec3 geodetic_to_ecef(const Geodetic& g);
Geodetic ecef_to_geodetic(const Vec3& ecef);

// WGS-84 -> UTM (Snyder series, k0 = 0.9996). Throws UnsupportedZone
// outside the UTM latitude band (84N..80S).
UtmCoord to_utm(const Vec3& ecef);
UtmCoord geodetic_to_utm(const Geodetic& g);
Geodetic utm_to_geodetic(const UtmCoord& u);

// Rows are the local East/North/Up unit vectors in ECEF at `ref`.
std::array<Vec3, 3> enu_basis(const Vec3& ref_ecef);

// Offset a point by a local ENU displacement.
Vec3 ecef_offset_enu(const Vec3& ref_ecef, const Vec3& enu);

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline Vec3 sub(const Vec3& a, const Vec3& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Vec3 add(const Vec3& a, const Vec3& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Vec3 scale(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
double norm(const Vec3& a);

}  // namespace sicrx
