#include "sicrx/nav.hpp"

#include <cmath>
#include <stdexcept>

namespace sicrx {
namespace {

constexpr int kPosBits = 22;
constexpr std::int32_t kPosMax = (1 << (kPosBits - 1)) - 1;

std::uint8_t crc8(const std::uint8_t* bits, int n) {
  std::uint8_t crc = 0;
  for (int i = 0; i < n; ++i) {
    const std::uint8_t fb = static_cast<std::uint8_t>(((crc >> 7) & 1u) ^ (bits[i] & 1u));
    crc = static_cast<std::uint8_t>(crc << 1);
    if (fb) crc ^= 0x07;
  }
  return crc;
}

void append_bits(std::vector<std::uint8_t>& out, std::uint32_t value, int nbits) {
  for (int i = nbits - 1; i >= 0; --i) out.push_back((value >> i) & 1u);
}

std::uint32_t read_bits(const std::uint8_t* bits, int offset, int nbits, bool inverted) {
  std::uint32_t v = 0;
  for (int i = 0; i < nbits; ++i) {
    std::uint32_t b = bits[offset + i] & 1u;
    if (inverted) b ^= 1u;
    v = (v << 1) | b;
  }
  return v;
}

std::int32_t sign_extend(std::uint32_t v, int nbits) {
  const std::uint32_t m = 1u << (nbits - 1);
  return static_cast<std::int32_t>((v ^ m) - m);
}

long long floor_div(long long a, long long b) {
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

NavMessage::NavMessage(int prn_id, std::array<double, 3> sat_pos_ecef, int tow_offset)
    : prn_id_(prn_id), tow_offset_(tow_offset), sat_pos_(quantize_position(sat_pos_ecef)) {
  for (double c : sat_pos_) {
    if (std::abs(c) > kPosMax * kPosQuantum) {
      throw std::invalid_argument("NavMessage: satellite position out of payload range");
    }
  }
}

std::array<double, 3> NavMessage::quantize_position(const std::array<double, 3>& pos_ecef) {
  std::array<double, 3> q{};
  for (int i = 0; i < 3; ++i) q[i] = std::round(pos_ecef[i] / kPosQuantum) * kPosQuantum;
  return q;
}

std::vector<std::uint8_t> NavMessage::frame_bits(int tow) const {
  std::vector<std::uint8_t> bits;
  bits.reserve(kFrameBits);
  append_bits(bits, kPreamble, 8);
  append_bits(bits, static_cast<std::uint32_t>(prn_id_) & 0x3F, 6);
  append_bits(bits, static_cast<std::uint32_t>(tow) & 0xFFF, 12);
  for (int i = 0; i < 3; ++i) {
    const auto counts = static_cast<std::int32_t>(std::lround(sat_pos_[i] / kPosQuantum));
    append_bits(bits, static_cast<std::uint32_t>(counts) & ((1u << kPosBits) - 1), kPosBits);
  }
  append_bits(bits, crc8(bits.data(), static_cast<int>(bits.size())), 8);
  return bits;
}

int NavMessage::bit(long long global_bit_index) const {
  const long long frame = floor_div(global_bit_index, kFrameBits);
  const long long in_frame = global_bit_index - frame * kFrameBits;
  const int tow = static_cast<int>(tow_offset_ + frame);
  const auto bits = frame_bits(tow);
  return bits[static_cast<std::size_t>(in_frame)] ? -1 : 1;
}

std::optional<NavFrame> NavMessage::decode_frame(const std::uint8_t* bits, bool inverted) {
  if (read_bits(bits, 0, 8, inverted) != kPreamble) return std::nullopt;
  std::uint8_t crc = 0;
  {
    std::vector<std::uint8_t> raw(kFrameBits - 8);
    for (int i = 0; i < kFrameBits - 8; ++i) raw[i] = (bits[i] & 1u) ^ (inverted ? 1u : 0u);
    crc = crc8(raw.data(), kFrameBits - 8);
  }
  if (crc != read_bits(bits, kFrameBits - 8, 8, inverted)) return std::nullopt;

  NavFrame f;
  f.prn_id = static_cast<int>(read_bits(bits, 8, 6, inverted));
  f.tow = static_cast<int>(read_bits(bits, 14, 12, inverted));
  for (int i = 0; i < 3; ++i) {
    const std::int32_t counts = sign_extend(read_bits(bits, 26 + i * kPosBits, kPosBits, inverted),
                                            kPosBits);
    f.sat_pos_ecef[i] = counts * kPosQuantum;
  }
  return f;
}

}  // namespace sicrx
