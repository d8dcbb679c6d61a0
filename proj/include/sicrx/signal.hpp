#pragma once

#include <functional>

#include "sicrx/ca_code.hpp"
#include "sicrx/common.hpp"
#include "sicrx/nav.hpp"

namespace sicrx {

// Physical parameters of one emitter (legitimate satellite or spoofer).
//
// path_delay is the full transit delay D at t = 0: code, bit and frame
// timing all derive from the single emission map e(t) = t - D(t), with
// D(t) drifting at the code-Doppler rate -doppler/kCarrierFreq.  The
// acquisition-visible code delay is D mod 1 ms.
struct SatelliteSignalParams {
  int prn_id = 0;
  double amplitude = 1.0;      // linear, a
  double path_delay = 0.0;     // s, D at t = 0
  double doppler = 0.0;        // Hz, f_D
  double carrier_phase = 0.0;  // rad, phi at t = 0
  NavMessage nav;

  double code_delay() const {
    double d = std::fmod(path_delay, kCodePeriod);
    return d < 0.0 ? d + kCodePeriod : d;
  }

  // Throws std::invalid_argument on violated bounds.
  void validate() const;
};

// Per-millisecond delay schedule: returns D at block start time t.
using DelayFn = std::function<double(double)>;

// Accumulate one emitter into `out` (sample-wise add).  Delay is held
// constant within each 1 ms block, re-evaluated at block boundaries.
void add_signal(IqBuffer& out, const SatelliteSignalParams& params, const DelayFn& delay);

// Baseband signal of a single satellite:
//   a * code(e) * bit(e) * exp(j(2*pi*f_D*t + phi)),  e = t - D(t).
// Requires duration >= 1 ms and sample_rate >= 2.046 MHz.
IqBuffer synthesize_signal(const SatelliteSignalParams& params, double duration,
                           double sample_rate);

}  // namespace sicrx
