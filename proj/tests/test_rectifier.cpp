#include "sicrx/rectifier.hpp"

#include <cmath>

#include "doctest.h"

using namespace sicrx;

namespace {

ChannelObservation obs(int prn, double t_rx, double t_tx) {
  ChannelObservation c;
  c.prn_id = prn;
  c.t_rx = t_rx;
  c.t_tx = t_tx;
  return c;
}

}  // namespace

TEST_CASE("direct substitution: zero delays give c * t_ref") {
  // all emissions simultaneous -> every satellite is the reference
  std::vector<ChannelObservation> channels = {obs(1, 0.0, 0.0), obs(2, 0.0, 0.0),
                                              obs(3, 0.0, 0.0), obs(4, 0.0, 0.0)};
  const auto pr = compute_pseudoranges(channels, 70e-3);
  for (const auto& e : pr.entries) {
    CHECK(e.pseudorange == doctest::Approx(20985472.06).epsilon(1e-9));
  }
  CHECK_FALSE(pr.t_ref_warning);
}

TEST_CASE("relative ranges come out through emission-time differences") {
  // satellite 2 is 300 m farther: its emission observed at the common
  // epoch is 300/c older
  const double d = 300.0 / kSpeedOfLight;
  std::vector<ChannelObservation> channels = {obs(1, 2.0, 1.93), obs(2, 2.0, 1.93 - d),
                                              obs(3, 2.0, 1.93 - 2 * d),
                                              obs(4, 2.0, 1.93 - 3 * d)};
  const auto pr = compute_pseudoranges(channels, 70e-3);
  CHECK(pr.entries[1].pseudorange - pr.entries[0].pseudorange == doctest::Approx(300.0));
  CHECK(pr.entries[3].pseudorange - pr.entries[0].pseudorange == doctest::Approx(900.0));
}

TEST_CASE("t_ref outside the 65-85 ms convention band sets the warning") {
  std::vector<ChannelObservation> channels = {obs(1, 0.0, 0.0), obs(2, 0.0, 0.0),
                                              obs(3, 0.0, 0.0), obs(4, 0.0, 0.0)};
  CHECK_FALSE(compute_pseudoranges(channels, 65e-3).t_ref_warning);
  CHECK_FALSE(compute_pseudoranges(channels, 85e-3).t_ref_warning);
  CHECK(compute_pseudoranges(channels, 62e-3).t_ref_warning);
  CHECK(compute_pseudoranges(channels, 90e-3).t_ref_warning);
}

TEST_CASE("fewer than four locked channels is an error") {
  std::vector<ChannelObservation> channels = {obs(1, 0.0, 0.0), obs(2, 0.0, 0.0),
                                              obs(3, 0.0, 0.0), obs(4, 0.0, 0.0)};
  channels[3].locked = false;
  CHECK_THROWS_AS(compute_pseudoranges(channels, 70e-3), InsufficientSatellites);
}

TEST_CASE("mismatched epochs are rejected") {
  std::vector<ChannelObservation> channels = {obs(1, 0.0, 0.0), obs(2, 0.0, 0.0),
                                              obs(3, 0.0, 0.0), obs(4, 1e-3, 0.0)};
  CHECK_THROWS_AS(compute_pseudoranges(channels, 70e-3), std::invalid_argument);
}

TEST_CASE("implausible pseudoranges are rejected") {
  // a 50 ms spread pushes the farthest satellite past c * 100 ms
  std::vector<ChannelObservation> channels = {obs(1, 0.0, 0.0), obs(2, 0.0, -50e-3),
                                              obs(3, 0.0, 0.0), obs(4, 0.0, 0.0)};
  CHECK_THROWS_AS(compute_pseudoranges(channels, 70e-3), std::invalid_argument);
}

TEST_CASE("zero offsets leave rectification a no-op") {
  std::vector<ChannelObservation> channels = {obs(1, 2.0, 1.93), obs(2, 2.0, 1.931),
                                              obs(3, 2.0, 1.9305), obs(4, 2.0, 1.9293)};
  std::vector<DelayOffset> offsets;
  for (int prn = 1; prn <= 4; ++prn) offsets.push_back({prn, 500e-6, 500e-6});

  const auto plain = compute_pseudoranges(channels, 70e-3);
  const auto fixed = rectify(channels, offsets, 70e-3);
  REQUIRE(fixed.entries.size() == plain.entries.size());
  for (std::size_t i = 0; i < fixed.entries.size(); ++i) {
    CHECK(fixed.entries[i].pseudorange == plain.entries[i].pseudorange);
    CHECK(fixed.entries[i].rectified);
    CHECK_FALSE(plain.entries[i].rectified);
  }
}

TEST_CASE("rectified pseudoranges equal the legitimate channels exactly") {
  // dyadic values make every subtraction exact, so the identity
  // (Eq. 13 into Eq. 12 gives Eq. 11) holds bitwise
  const double t_rx = std::ldexp(3.0, -1);  // 1.5 s
  std::vector<ChannelObservation> legit, adversarial;
  std::vector<DelayOffset> offsets;
  for (int prn = 1; prn <= 5; ++prn) {
    const double d_l = std::ldexp(std::round(std::ldexp(70e-3 + prn * 3e-4, 30)), -30);
    const double delta = std::ldexp(prn * 11.0, -22);
    const double tau_l = std::ldexp(300.0, -20);
    legit.push_back(obs(prn, t_rx, t_rx - d_l));
    adversarial.push_back(obs(prn, t_rx, t_rx - d_l - delta));
    offsets.push_back({prn, tau_l + delta, tau_l});  // delta() reproduces delta exactly
  }

  const auto from_legit = compute_pseudoranges(legit, 70e-3);
  const auto from_rectified = rectify(adversarial, offsets, 70e-3);
  REQUIRE(from_legit.entries.size() == from_rectified.entries.size());
  for (std::size_t i = 0; i < from_legit.entries.size(); ++i) {
    CHECK(from_rectified.entries[i].pseudorange == from_legit.entries[i].pseudorange);
  }
}

TEST_CASE("missing offsets raise a partial-rectification error naming the PRNs") {
  std::vector<ChannelObservation> channels = {obs(1, 0.0, 0.0), obs(2, 0.0, 0.0),
                                              obs(3, 0.0, 0.0), obs(7, 0.0, 0.0)};
  std::vector<DelayOffset> offsets = {{1, 1e-6, 1e-6}, {2, 1e-6, 1e-6}, {3, 1e-6, 1e-6}};
  try {
    rectify(channels, offsets, 70e-3);
    FAIL("expected PartialRectification");
  } catch (const PartialRectification& e) {
    REQUIRE(e.missing_prns.size() == 1);
    CHECK(e.missing_prns[0] == 7);
  }
}
