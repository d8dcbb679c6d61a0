#include "sicrx/geodesy.hpp"

#include <cmath>

#include "doctest.h"

using namespace sicrx;

namespace {
constexpr double deg = kPi / 180.0;
}

// Reference values frozen from an independent Python implementation of
// the Snyder series (USGS PP 1395).
TEST_CASE("equator/prime-meridian maps to zone 31 with the canonical easting") {
  const auto u = to_utm({6378137.0, 0.0, 0.0});
  CHECK(u.zone == 31);
  CHECK(u.north);
  CHECK(u.easting == doctest::Approx(166021.4432).epsilon(1e-8));
  CHECK(std::abs(u.northing) < 1e-6);
}

TEST_CASE("reference city fixes match the independent implementation") {
  {
    const auto u = geodetic_to_utm({37.7749 * deg, -122.4194 * deg, 50.0});
    CHECK(u.zone == 10);
    CHECK(u.easting == doctest::Approx(551130.7685).epsilon(1e-9));
    CHECK(u.northing == doctest::Approx(4180998.8816).epsilon(1e-9));
  }
  {
    const auto u = geodetic_to_utm({42.34 * deg, -71.09 * deg, 20.0});
    CHECK(u.zone == 19);
    CHECK(u.easting == doctest::Approx(327832.0225).epsilon(1e-9));
    CHECK(u.northing == doctest::Approx(4689642.6120).epsilon(1e-9));
  }
  {
    const auto u = geodetic_to_utm({-33.8688 * deg, 151.2093 * deg, 30.0});
    CHECK(u.zone == 56);
    CHECK_FALSE(u.north);
    CHECK(u.easting == doctest::Approx(334368.6336).epsilon(1e-9));
    CHECK(u.northing == doctest::Approx(6250948.3453).epsilon(1e-9));
  }
}

TEST_CASE("ecef/geodetic round trip") {
  const Geodetic g{42.34 * deg, -71.09 * deg, 20.0};
  const auto e = geodetic_to_ecef(g);
  CHECK(e[0] == doctest::Approx(1530207.6178).epsilon(1e-10));
  CHECK(e[1] == doctest::Approx(-4466826.5943).epsilon(1e-10));
  CHECK(e[2] == doctest::Approx(4273607.7993).epsilon(1e-10));
  const auto back = ecef_to_geodetic(e);
  CHECK(back.lat_rad == doctest::Approx(g.lat_rad).epsilon(1e-12));
  CHECK(back.lon_rad == doctest::Approx(g.lon_rad).epsilon(1e-12));
  CHECK(back.height_m == doctest::Approx(g.height_m).epsilon(1e-6));
}

TEST_CASE("utm -> geodetic -> utm round trip within a millimeter") {
  for (const Geodetic g : {Geodetic{37.7749 * deg, -122.4194 * deg, 0.0},
                           Geodetic{-12.5 * deg, 31.2 * deg, 0.0},
                           Geodetic{60.01 * deg, 5.4 * deg, 0.0}}) {
    const auto u = geodetic_to_utm(g);
    const auto back = utm_to_geodetic(u);
    const auto u2 = geodetic_to_utm(back);
    CHECK(std::abs(u2.easting - u.easting) < 1e-3);
    CHECK(std::abs(u2.northing - u.northing) < 1e-3);
    CHECK(u2.zone == u.zone);
  }
}

TEST_CASE("a 10.1 m grid-north displacement changes northing by 10.1 m") {
  const Geodetic g{37.7749 * deg, -122.4194 * deg, 0.0};
  const auto p0 = geodetic_to_ecef(g);
  const auto p1 = ecef_offset_enu(p0, {0.0, 10.1, 0.0});
  const auto u0 = to_utm(p0);
  const auto u1 = to_utm(p1);
  CHECK(u1.northing - u0.northing == doctest::Approx(10.1).epsilon(1e-3));
  // small easting drift from meridian convergence (true north vs grid north)
  CHECK(std::abs(u1.easting - u0.easting) < 0.1);
}

TEST_CASE("polar latitudes are rejected") {
  const auto arctic = geodetic_to_ecef({86.0 * deg, 10.0 * deg, 0.0});
  CHECK_THROWS_AS(to_utm(arctic), UnsupportedZone);
  const auto antarctic = geodetic_to_ecef({-85.0 * deg, 10.0 * deg, 0.0});
  CHECK_THROWS_AS(to_utm(antarctic), UnsupportedZone);
}

TEST_CASE("enu basis is orthonormal and points up") {
  const auto ref = geodetic_to_ecef({42.34 * deg, -71.09 * deg, 20.0});
  const auto basis = enu_basis(ref);
  for (int i = 0; i < 3; ++i) {
    CHECK(norm(basis[i]) == doctest::Approx(1.0).epsilon(1e-12));
    for (int j = i + 1; j < 3; ++j) CHECK(std::abs(dot(basis[i], basis[j])) < 1e-12);
  }
  // up is radially outward at the reference point
  const double along = dot(basis[2], ref) / norm(ref);
  CHECK(along > 0.99);
}
