#pragma once

#include <vector>

#include "sicrx/ca_code.hpp"
#include "sicrx/common.hpp"

namespace sicrx {

// Search and detection knobs. The detection threshold is the ratio of a
// peak to the grid mean outside a one-chip exclusion band around the top
// peak; the default is calibrated so that pure noise clears it with
// probability >= 0.999 (see the acquisition Monte Carlo test).
struct AcqConfig {
  double doppler_min = -5000.0;  // Hz
  double doppler_max = 5000.0;   // Hz
  double doppler_step = 250.0;   // Hz
  int noncoherent_periods = 4;
  double detection_threshold = 13.0;
  // Candidates below this fraction of the strongest peak are treated as
  // correlation structure of that peak, not as an independent emitter.
  // The C/A cross-ambiguity floor (Gold sidelobes plus code-product
  // spectral lines leaking across doppler bins) measures ~0.013 of the
  // peak at 4-period integration, so auxiliary peaks are resolvable for
  // power imbalances up to ~15 dB.
  double sidelobe_rejection = 0.02;
  double aux_separation_threshold = 500e-9;  // s, multipath bound
  double exclusion_chips = 1.0;
  int max_peaks = 4;

  std::vector<double> doppler_bins() const;
};

// |R_xd|^2 over (doppler bin, code-delay sample).
struct CafGrid {
  std::vector<std::vector<double>> values;  // [bin][delay], >= 0
  std::vector<double> doppler_bins;         // Hz
  int prn_id = 0;                           // code the grid was built against
  int K = 0;                                // samples per coherent block
  double sample_rate = 0.0;                 // Sa/s
  int periods = 0;                          // non-coherent blocks averaged
};

struct AcqPeak {
  int prn_id = 0;
  double code_delay = 0.0;           // s, sub-sample interpolated
  double doppler = 0.0;              // Hz
  double peak_metric = 0.0;          // S_max
  double estimated_amplitude = 0.0;  // sqrt(S_max)/K
};

struct SpoofVerdict {
  bool spoofing = false;
  std::vector<AcqPeak> peaks;  // ordered by metric, strongest first
  double separation = 0.0;     // s between the top two peaks
};

// Carrier wipe-off followed by circular correlation in the Fourier
// domain, per doppler bin; squared magnitudes averaged over
// `noncoherent_periods` consecutive code periods (as many full periods
// as the buffer holds, at most that count).
CafGrid compute_caf(const IqBuffer& buffer, const PrnCode& code,
                    const std::vector<double>& doppler_bins, int noncoherent_periods = 4);

// Up to max_peaks local maxima above the detection threshold, each
// separated from higher-ranked peaks by more than exclusion_chips in
// delay; code delay refined by parabolic interpolation across the three
// adjacent delay samples.
std::vector<AcqPeak> find_peaks(const CafGrid& grid, int max_peaks,
                                const AcqConfig& config = {});

// Auxiliary-peak test: spoofing iff at least two above-threshold peaks
// separated by more than the multipath bound.
SpoofVerdict detect_spoofing(const std::vector<AcqPeak>& peaks, const AcqConfig& config = {});

// Grid mean outside a one-chip band around the strongest cell; the
// noise-floor statistic the detection threshold is measured against.
double caf_noise_floor(const CafGrid& grid, const AcqConfig& config = {});

}  // namespace sicrx
