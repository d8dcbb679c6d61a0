#pragma once

#include <vector>

#include "sicrx/acquisition.hpp"
#include "sicrx/common.hpp"
#include "sicrx/nav.hpp"

namespace sicrx {

// Per-code-period tracking snapshot.
struct ChannelState {
  int prn_id = 0;
  double code_delay = 0.0;        // s in [0, 1 ms): buffer time mod 1 ms at which
                                  // the tracked code period began
  double doppler = 0.0;           // Hz, carrier NCO
  double carrier_phase = 0.0;     // rad, carrier NCO at period start
  long long sample_counter = 0;   // samples since receiver start (t_rx source)
  bool locked = false;
};

struct BitObservation {
  int value = 0;               // +1 / -1
  long long start_period = 0;  // index of the bit's first code period
};

struct TrackResult {
  int prn_id = 0;
  double sample_rate = 0.0;
  std::vector<ChannelState> history;       // one per code period
  std::vector<double> period_start_time;   // s, receiver time, sub-sample precise
  std::vector<cdouble> prompts;            // prompt correlator per period
  std::vector<double> amplitudes;          // |P|/K per period
  std::vector<double> code_freqs;          // chips/s per period (NCO rate)
  std::vector<BitObservation> bits;        // demodulated at 50 bps
  int bit_edge_offset = 0;                 // period index mod 20 of bit edges
  bool lost_lock = false;
  double lock_lost_at = 0.0;               // s, receiver time

  std::vector<int> bit_values() const {
    std::vector<int> v;
    v.reserve(bits.size());
    for (const auto& b : bits) v.push_back(b.value);
    return v;
  }
};

// Frame synchronisation: preamble location plus the decoded payload.
struct FrameSync {
  long long preamble_sample_index = 0;  // integer sample counter at frame boundary
  double toa = 0.0;                     // s, frame-boundary arrival, sub-sample precise
  NavFrame frame;                       // decoded payload
  bool inverted = false;                // BPSK polarity flag
  long long preamble_period_index = 0;  // code periods since track start
  int preamble_bit_index = 0;           // index into TrackResult::bits
};

struct TrackConfig {
  double dll_bandwidth = 2.0;    // Hz
  double pll_bandwidth = 25.0;   // Hz
  double correlator_spacing = 0.5;  // chips, early/late offset from prompt
  double lock_fraction = 0.35;   // of the initial prompt magnitude
  double lock_timeout = 50e-3;   // s of consecutive sub-threshold prompts
  // Handoff frequency snap: the carrier NCO is corrected once from the
  // prompt-phase slope over this many initial periods before the Costas
  // loop closes (a coarse acquisition bin can sit up to half a bin off,
  // beyond the loop's capture range).
  int pull_in_periods = 20;
};

// Early-prompt-late code tracking with a Costas carrier loop, seeded from
// an acquisition peak. Begins at the first code-period boundary at or
// after start_at and emits one snapshot per code period. Throws
// TrackingFailure (carrying nothing; use track_channel for partials) if
// the prompt stays under the lock threshold for longer than the timeout.
TrackResult track(const IqBuffer& buffer, const AcqPeak& start, double duration,
                  const TrackConfig& config = {}, double start_at = 0.0);

// As track(), but reports loss of lock through TrackResult::lost_lock
// instead of throwing; history up to the failure point is kept.
TrackResult track_channel(const IqBuffer& buffer, const AcqPeak& start, double duration,
                          const TrackConfig& config = {}, double start_at = 0.0);

// Locates the nav preamble in the demodulated bit stream (both
// polarities), requiring two consecutive frame-spaced matches with valid
// checksums. Throws TrackingFailure if no preamble qualifies.
FrameSync find_preamble(const TrackResult& tracked);

// Emission time of the signal arriving at receiver time t_rx, derived
// from the frame sync and the tracked code phase (the common-reception
// measurement for pseudoranges).
double emission_time_at(const TrackResult& tracked, const FrameSync& sync, double t_rx);

}  // namespace sicrx
