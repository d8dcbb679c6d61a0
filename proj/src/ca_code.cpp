#include "sicrx/ca_code.hpp"

#include <stdexcept>

namespace sicrx {
namespace {

// G2 phase-select taps (1-based stage numbers) per PRN, ICD-GPS-200 table 3-I.
constexpr int kG2Taps[32][2] = {
    {2, 6},  {3, 7},  {4, 8},  {5, 9},  {1, 9},  {2, 10}, {1, 8},  {2, 9},
    {3, 10}, {2, 3},  {3, 4},  {5, 6},  {6, 7},  {7, 8},  {8, 9},  {9, 10},
    {1, 4},  {2, 5},  {3, 6},  {4, 7},  {5, 8},  {6, 9},  {1, 3},  {4, 6},
    {5, 7},  {6, 8},  {7, 9},  {8, 10}, {1, 6},  {2, 7},  {3, 8},  {4, 9},
};

}  // namespace

PrnCode generate_ca_code(int prn_id) {
  if (prn_id < 1 || prn_id > 32) {
    throw std::invalid_argument("generate_ca_code: prn_id must be in 1..32, got " +
                                std::to_string(prn_id));
  }
  const int t1 = kG2Taps[prn_id - 1][0];
  const int t2 = kG2Taps[prn_id - 1][1];

  // Two 10-stage LFSRs, all-ones initial state.
  // G1 feedback: stages 3,10.  G2 feedback: stages 2,3,6,8,9,10.
  std::array<int, 10> g1;
  std::array<int, 10> g2;
  g1.fill(1);
  g2.fill(1);

  std::array<std::int8_t, kCodeLength> chips{};
  for (int i = 0; i < kCodeLength; ++i) {
    const int bit = g1[9] ^ (g2[t1 - 1] ^ g2[t2 - 1]);
    chips[i] = static_cast<std::int8_t>(1 - 2 * bit);  // binary 1 -> chip -1

    const int f1 = g1[2] ^ g1[9];
    const int f2 = g2[1] ^ g2[2] ^ g2[5] ^ g2[7] ^ g2[8] ^ g2[9];
    for (int s = 9; s > 0; --s) {
      g1[s] = g1[s - 1];
      g2[s] = g2[s - 1];
    }
    g1[0] = f1;
    g2[0] = f2;
  }
  return PrnCode(prn_id, chips);
}

}  // namespace sicrx
