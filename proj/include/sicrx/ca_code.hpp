#pragma once

#include <array>
#include <cstdint>

#include "sicrx/common.hpp"

namespace sicrx {

// One satellite's C/A spreading code, chips in {+1,-1}.
class PrnCode {
 public:
  PrnCode(int prn_id, std::array<std::int8_t, kCodeLength> chips)
      : prn_id_(prn_id), chips_(chips) {}

  int prn_id() const { return prn_id_; }
  int chip(int index) const {
    int m = index % kCodeLength;
    return chips_[m < 0 ? m + kCodeLength : m];
  }
  const std::array<std::int8_t, kCodeLength>& chips() const { return chips_; }

 private:
  int prn_id_;
  std::array<std::int8_t, kCodeLength> chips_;
};

// Standard Gold code for PRN 1..32. Deterministic; throws
// std::invalid_argument for out-of-range ids.
PrnCode generate_ca_code(int prn_id);

}  // namespace sicrx
