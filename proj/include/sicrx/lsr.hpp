#pragma once

#include <string>
#include <vector>

#include "sicrx/acquisition.hpp"
#include "sicrx/common.hpp"
#include "sicrx/signal.hpp"
#include "sicrx/tracking.hpp"

namespace sicrx {

// Attacker-signal estimate assembled by the recovery loop. Replica nav
// bits come from tracking the adversarial peak itself; period_bits holds
// the per-code-period sign stream the replica generator consumes.
struct RecoveryEstimate {
  int prn_id = 0;
  double amplitude = 0.0;      // a_AT, linear
  double code_delay = 0.0;     // tau_AT, s in [0, 1 ms)
  double doppler = 0.0;        // f_AT, Hz
  double carrier_phase = 0.0;  // phi_AT, rad (cycled offset already applied)
  std::vector<int> nav_bits;   // s_AT at 50 bps (leading partial bit included)
  std::vector<int> period_bits;  // one sign per code period of the buffer
  int bit_edge_offset = 0;       // period index mod 20 of bit boundaries
  double residual_metric = 0.0;  // S_max remaining at the peak after subtraction
};

struct ExtractResult {
  double carrier_phase = 0.0;  // rad, at buffer start (first bit taken as +1)
  std::vector<int> nav_bits;
  std::vector<int> period_bits;
  int bit_edge_offset = 0;
  double doppler_correction = 0.0;  // Hz, prompt-phase-slope refinement
  double mean_amplitude = 0.0;      // mean |P|/K over the window
};

struct RecoveryIteration {
  int index = 0;
  bool accepted = false;
  double pre_smax = 0.0;
  double post_smax = 0.0;
  double attenuation_db = 0.0;
  int peaks_after = 0;
};

struct RecoveryReport {
  bool success = false;
  int iterations = 0;
  std::vector<RecoveryIteration> per_iteration;
  SpoofVerdict final_verdict;
  AcqPeak recovered_peak;      // the legitimate one, when success
  AcqPeak residual_adversarial;
  RecoveryEstimate last_estimate;
  std::string failure_reason;

  std::string to_json() const;
};

// Eq.-style amplitude inversion: |a| = sqrt(S_max) / K.
double estimate_amplitude(double peak_metric, int K);

// Re-acquisition on a refined grid around a coarse peak: +-1 coarse
// doppler bin in steps of at most 25 Hz, +-1 sample in delay with
// parabolic interpolation. The returned peak's CAF value is never below
// the coarse cell's value under the same signal-aligned metric.
AcqPeak refine_acquisition(const IqBuffer& buffer, const AcqPeak& coarse,
                           const AcqConfig& config = {});

// Signal-aligned CAF value at one (doppler, delay) cell, averaged over
// `periods` code periods and normalised to the a^2 K^2 peak scale.
double caf_value_at(const IqBuffer& buffer, const PrnCode& code, double doppler,
                    double code_delay, int periods);

// Minimal open-loop tracker at a fixed refined peak: per-period prompt
// correlators give the carrier phase at buffer start, the demodulated
// bits and a prompt-phase-slope doppler polish. Throws TrackingFailure
// if the prompt collapses mid-run.
ExtractResult extract_phase_and_bits(const IqBuffer& buffer, const AcqPeak& peak,
                                     double duration);

struct CancelConfig {
  int phase_candidates = 16;        // uniform offsets over [0, 2*pi)
  int golden_iterations = 12;       // refinement passes on the best bracket
  int metric_periods = 4;           // periods for the residual metric
};

// Subtracts the replica built from `estimate`, choosing the carrier
// phase offset that minimises the residual peak metric (cycled over
// phase_candidates offsets, then golden-section refined). Returns the
// residual buffer and writes the winning phase and residual metric back
// into `estimate`.
IqBuffer cancel(const IqBuffer& buffer, RecoveryEstimate& estimate,
                const CancelConfig& config = {});

struct RecoverConfig {
  AcqConfig acq;
  CancelConfig cancel;
  double extract_duration = 0.1;  // s of bits per iteration
  // residual peaks within this delay of the adversarial peak count as its
  // remains; peaks beyond legit_search_radius are correlation structure
  // of other emitters, not legitimate candidates (spoofing offsets are
  // kilometre-scale, i.e. a few microseconds)
  double residue_radius_chips = 0.5;
  double legit_search_radius = 30e-6;  // s
};

// The iterative refine -> estimate -> cancel -> re-acquire loop. The
// adversarial peak is an input (chosen by the maneuver correlator or an
// override), never inferred from power. Iterations that increase the
// residual peak are rolled back and retried with a damped amplitude.
// Succeeds when the spoofing verdict clears or the legitimate peak
// dominates; the report carries the full iteration history either way.
std::pair<IqBuffer, RecoveryReport> recover(const IqBuffer& buffer, const SpoofVerdict& verdict,
                                            std::size_t adversarial_peak_index, int max_iters,
                                            const RecoverConfig& config = {});

// Regenerates the tracked signal from per-period tracking state and
// subtracts it in place: streaming interference cancellation for spans
// longer than the recovery window.
void subtract_tracked(IqBuffer& buffer, const TrackResult& tracked);

}  // namespace sicrx
