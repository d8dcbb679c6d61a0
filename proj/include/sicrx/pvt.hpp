#pragma once

#include <map>

#include "sicrx/geodesy.hpp"
#include "sicrx/rectifier.hpp"

namespace sicrx {

// Satellite state as decoded from the nav payload.
struct SatState {
  Vec3 pos_ecef{};
  double tx_time = 0.0;  // s, frame transmit epoch
};

struct PvtSolution {
  Vec3 position_ecef{};
  double clock_bias = 0.0;    // s
  double residual_rms = 0.0;  // m
  UtmCoord utm;               // zone 0 if outside the UTM latitude band
  double time = 0.0;          // s, receiver epoch of the fix
  int num_sats = 0;
  int iterations = 0;
};

// Iterative least squares (Gauss-Newton on range residuals) over
// position and receiver clock bias. Converged when the position update
// drops under 1e-3 m, at most 20 iterations. Throws
// InsufficientSatellites or SolverError (with a condition estimate) on
// degenerate geometry or divergence.
PvtSolution solve(const PseudorangeSet& pr, const std::map<int, SatState>& sat_states);

}  // namespace sicrx
