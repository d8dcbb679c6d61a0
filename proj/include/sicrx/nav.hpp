#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "sicrx/common.hpp"

namespace sicrx {

// Decoded content of one nav frame.
struct NavFrame {
  int prn_id = 0;
  int tow = 0;  // frame counter; frame k starts at transmit time k * kFrameDuration
  std::array<double, 3> sat_pos_ecef{};  // m, on the kPosQuantum grid
};

// Simplified 100-bit nav frame transmitted at 50 bps:
//   preamble(8) | prn(6) | tow(12) | x(22) | y(22) | z(22) | crc8(8)
// Positions are signed counts of 16 m; the frame payload carries the
// satellite state directly instead of orbital elements.
class NavMessage {
 public:
  static constexpr int kFrameBits = 100;
  static constexpr std::uint8_t kPreamble = 0x8B;  // 10001011
  static constexpr double kFrameDuration = kFrameBits / kBitRate;  // 2 s
  static constexpr double kPosQuantum = 16.0;                      // m

  NavMessage(int prn_id, std::array<double, 3> sat_pos_ecef, int tow_offset = 16);

  int prn_id() const { return prn_id_; }
  int tow_offset() const { return tow_offset_; }
  const std::array<double, 3>& sat_pos_ecef() const { return sat_pos_; }

  // Bit (+1/-1) at global bit index; index 0 is the first bit of frame
  // tow_offset, negative indices reach into earlier frames.
  int bit(long long global_bit_index) const;

  // The 100 bits (0/1) of the frame with the given counter value.
  std::vector<std::uint8_t> frame_bits(int tow) const;

  // Snap an ECEF position onto the representable grid.
  static std::array<double, 3> quantize_position(const std::array<double, 3>& pos_ecef);

  // Validate preamble + CRC and unpack; nullopt if either check fails.
  // `inverted` decodes the complementary bit stream (BPSK polarity ambiguity).
  static std::optional<NavFrame> decode_frame(const std::uint8_t* bits, bool inverted);

 private:
  int prn_id_;
  int tow_offset_;
  std::array<double, 3> sat_pos_;
};

}  // namespace sicrx
