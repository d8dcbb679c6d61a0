#include "sicrx/geodesy.hpp"

#include <cmath>

namespace sicrx {

namespace {
constexpr double kWgsA = 6378137.0;
constexpr double kWgsF = 1.0 / 298.257223563;
constexpr double kWgsE2 = kWgsF * (2.0 - kWgsF);
constexpr double kWgsEp2 = kWgsE2 / (1.0 - kWgsE2);
constexpr double kUtmK0 = 0.9996;

double meridian_arc(double lat) {
  const double e2 = kWgsE2;
  return kWgsA *
         ((1 - e2 / 4 - 3 * e2 * e2 / 64 - 5 * e2 * e2 * e2 / 256) * lat -
          (3 * e2 / 8 + 3 * e2 * e2 / 32 + 45 * e2 * e2 * e2 / 1024) * std::sin(2 * lat) +
          (15 * e2 * e2 / 256 + 45 * e2 * e2 * e2 / 1024) * std::sin(4 * lat) -
          (35 * e2 * e2 * e2 / 3072) * std::sin(6 * lat));
}
}  // namespace

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

Vec3 geodetic_to_ecef(const Geodetic& g) {
  const double sl = std::sin(g.lat_rad), cl = std::cos(g.lat_rad);
  const double n = kWgsA / std::sqrt(1.0 - kWgsE2 * sl * sl);
  return {(n + g.height_m) * cl * std::cos(g.lon_rad),
          (n + g.height_m) * cl * std::sin(g.lon_rad),
          (n * (1.0 - kWgsE2) + g.height_m) * sl};
}

Geodetic ecef_to_geodetic(const Vec3& e) {
  const double p = std::hypot(e[0], e[1]);
  Geodetic g;
  g.lon_rad = std::atan2(e[1], e[0]);
  double lat = std::atan2(e[2], p * (1.0 - kWgsE2));
  for (int i = 0; i < 8; ++i) {
    const double sl = std::sin(lat);
    const double n = kWgsA / std::sqrt(1.0 - kWgsE2 * sl * sl);
    const double h = p / std::cos(lat) - n;
    lat = std::atan2(e[2], p * (1.0 - kWgsE2 * n / (n + h)));
  }
  const double sl = std::sin(lat);
  const double n = kWgsA / std::sqrt(1.0 - kWgsE2 * sl * sl);
  g.lat_rad = lat;
  g.height_m = p / std::cos(lat) - n;
  return g;
}

UtmCoord geodetic_to_utm(const Geodetic& g) {
  const double lat_deg = g.lat_rad * 180.0 / kPi;
  const double lon_deg = g.lon_rad * 180.0 / kPi;
  if (lat_deg > 84.0 || lat_deg < -80.0) {
    throw UnsupportedZone("to_utm: latitude outside UTM band: " + std::to_string(lat_deg));
  }
  UtmCoord u;
  u.zone = static_cast<int>(std::floor(lon_deg / 6.0)) + 31;
  if (u.zone < 1) u.zone += 60;
  if (u.zone > 60) u.zone -= 60;
  u.north = lat_deg >= 0.0;

  const double lon0 = ((u.zone - 31) * 6 + 3) * kPi / 180.0;
  const double lat = g.lat_rad;
  double dlon = g.lon_rad - lon0;
  while (dlon > kPi) dlon -= kTwoPi;
  while (dlon < -kPi) dlon += kTwoPi;

  const double sl = std::sin(lat), cl = std::cos(lat), tl = std::tan(lat);
  const double n = kWgsA / std::sqrt(1.0 - kWgsE2 * sl * sl);
  const double t = tl * tl;
  const double c = kWgsEp2 * cl * cl;
  const double a = dlon * cl;
  const double m = meridian_arc(lat);

  u.easting = kUtmK0 * n *
                  (a + (1 - t + c) * a * a * a / 6.0 +
                   (5 - 18 * t + t * t + 72 * c - 58 * kWgsEp2) * std::pow(a, 5) / 120.0) +
              500000.0;
  u.northing = kUtmK0 * (m + n * tl * (a * a / 2.0 +
                                       (5 - t + 9 * c + 4 * c * c) * std::pow(a, 4) / 24.0 +
                                       (61 - 58 * t + t * t + 600 * c - 330 * kWgsEp2) *
                                           std::pow(a, 6) / 720.0));
  if (!u.north) u.northing += 10000000.0;
  return u;
}

UtmCoord to_utm(const Vec3& ecef) { return geodetic_to_utm(ecef_to_geodetic(ecef)); }

Geodetic utm_to_geodetic(const UtmCoord& u) {
  const double x = u.easting - 500000.0;
  const double y = u.north ? u.northing : u.northing - 10000000.0;
  const double m = y / kUtmK0;

  const double e2 = kWgsE2;
  const double mu = m / (kWgsA * (1 - e2 / 4 - 3 * e2 * e2 / 64 - 5 * e2 * e2 * e2 / 256));
  const double e1 = (1 - std::sqrt(1 - e2)) / (1 + std::sqrt(1 - e2));
  const double phi1 = mu + (3 * e1 / 2 - 27 * std::pow(e1, 3) / 32) * std::sin(2 * mu) +
                      (21 * e1 * e1 / 16 - 55 * std::pow(e1, 4) / 32) * std::sin(4 * mu) +
                      (151 * std::pow(e1, 3) / 96) * std::sin(6 * mu) +
                      (1097 * std::pow(e1, 4) / 512) * std::sin(8 * mu);

  const double sl = std::sin(phi1), cl = std::cos(phi1), tl = std::tan(phi1);
  const double c1 = kWgsEp2 * cl * cl;
  const double t1 = tl * tl;
  const double n1 = kWgsA / std::sqrt(1 - e2 * sl * sl);
  const double r1 = kWgsA * (1 - e2) / std::pow(1 - e2 * sl * sl, 1.5);
  const double d = x / (n1 * kUtmK0);

  Geodetic g;
  g.lat_rad = phi1 - (n1 * tl / r1) *
                         (d * d / 2.0 -
                          (5 + 3 * t1 + 10 * c1 - 4 * c1 * c1 - 9 * kWgsEp2) * std::pow(d, 4) /
                              24.0 +
                          (61 + 90 * t1 + 298 * c1 + 45 * t1 * t1 - 252 * kWgsEp2 - 3 * c1 * c1) *
                              std::pow(d, 6) / 720.0);
  g.lon_rad = ((u.zone - 31) * 6 + 3) * kPi / 180.0 +
              (d - (1 + 2 * t1 + c1) * std::pow(d, 3) / 6.0 +
               (5 - 2 * c1 + 28 * t1 - 3 * c1 * c1 + 8 * kWgsEp2 + 24 * t1 * t1) *
                   std::pow(d, 5) / 120.0) /
                  cl;
  g.height_m = 0.0;
  return g;
}

std::array<Vec3, 3> enu_basis(const Vec3& ref_ecef) {
  const Geodetic g = ecef_to_geodetic(ref_ecef);
  const double sl = std::sin(g.lat_rad), cl = std::cos(g.lat_rad);
  const double so = std::sin(g.lon_rad), co = std::cos(g.lon_rad);
  return {Vec3{-so, co, 0.0},               // east
          Vec3{-sl * co, -sl * so, cl},     // north
          Vec3{cl * co, cl * so, sl}};      // up
}

Vec3 ecef_offset_enu(const Vec3& ref_ecef, const Vec3& enu) {
  const auto basis = enu_basis(ref_ecef);
  Vec3 out = ref_ecef;
  for (int i = 0; i < 3; ++i) {
    out[0] += basis[i][0] * enu[i];
    out[1] += basis[i][1] * enu[i];
    out[2] += basis[i][2] * enu[i];
  }
  return out;
}

}  // namespace sicrx
