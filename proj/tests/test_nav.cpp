#include "sicrx/nav.hpp"

#include <random>

#include "doctest.h"

using namespace sicrx;

TEST_CASE("frame round-trips the satellite state that produced it") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coord(-26.6e6, 26.6e6);
  for (int trial = 0; trial < 50; ++trial) {
    const std::array<double, 3> pos = {coord(rng), coord(rng), coord(rng)};
    const NavMessage msg(7, pos, 100);
    const auto bits = msg.frame_bits(123);
    REQUIRE(bits.size() == NavMessage::kFrameBits);

    const auto frame = NavMessage::decode_frame(bits.data(), false);
    REQUIRE(frame.has_value());
    CHECK(frame->prn_id == 7);
    CHECK(frame->tow == 123);
    // payload carries the quantized state exactly
    CHECK(frame->sat_pos_ecef == msg.sat_pos_ecef());
  }
}

TEST_CASE("preamble appears at every frame boundary") {
  const NavMessage msg(3, {1.0e7, -2.0e7, 5.0e6});
  for (int tow : {0, 1, 99, 4000}) {
    const auto bits = msg.frame_bits(tow);
    int preamble = 0;
    for (int i = 0; i < 8; ++i) preamble = (preamble << 1) | bits[i];
    CHECK(preamble == NavMessage::kPreamble);
  }
}

TEST_CASE("bit stream is consistent with frame bits across frame boundaries") {
  const NavMessage msg(12, {15.3e6, 9.9e6, -18.2e6}, 50);
  // global index 0 is the first bit of frame tow_offset = 50
  const auto f50 = msg.frame_bits(50);
  const auto f51 = msg.frame_bits(51);
  const auto f49 = msg.frame_bits(49);
  for (int i = 0; i < NavMessage::kFrameBits; ++i) {
    CHECK(msg.bit(i) == (f50[i] ? -1 : 1));
    CHECK(msg.bit(i + NavMessage::kFrameBits) == (f51[i] ? -1 : 1));
    CHECK(msg.bit(i - NavMessage::kFrameBits) == (f49[i] ? -1 : 1));
  }
}

TEST_CASE("corrupted frames fail the CRC") {
  const NavMessage msg(5, {2.2e7, 1.0e7, 8.0e6});
  auto bits = msg.frame_bits(7);
  bits[40] ^= 1;
  CHECK_FALSE(NavMessage::decode_frame(bits.data(), false).has_value());
}

TEST_CASE("inverted frames decode with the inverted flag") {
  const NavMessage msg(5, {2.2e7, 1.0e7, 8.0e6});
  auto bits = msg.frame_bits(7);
  for (auto& b : bits) b ^= 1;
  CHECK_FALSE(NavMessage::decode_frame(bits.data(), false).has_value());
  const auto frame = NavMessage::decode_frame(bits.data(), true);
  REQUIRE(frame.has_value());
  CHECK(frame->prn_id == 5);
  CHECK(frame->tow == 7);
}

TEST_CASE("out-of-range positions are rejected") {
  CHECK_THROWS_AS(NavMessage(1, {4.0e7, 0.0, 0.0}), std::invalid_argument);
}
