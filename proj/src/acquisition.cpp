#include "sicrx/acquisition.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sicrx {

namespace {

// RAII around a 1-D c2c FFTW double plan usable on any array.
class FftPlan {
 public:
  FftPlan(int n, int sign) : n_(n) {
    scratch_ = fftw_alloc_complex(static_cast<std::size_t>(n));
    plan_ = fftw_plan_dft_1d(n, scratch_, scratch_, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan_) throw std::runtime_error("FFTW plan creation failed");
  }
  ~FftPlan() {
    fftw_destroy_plan(plan_);
    fftw_free(scratch_);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  void execute(cdouble* data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plan_, p, p);
  }

 private:
  int n_;
  fftw_complex* scratch_;
  fftw_plan plan_;
};

int wrap_index(int i, int n) {
  int m = i % n;
  return m < 0 ? m + n : m;
}

}  // namespace

std::vector<double> AcqConfig::doppler_bins() const {
  std::vector<double> bins;
  for (double f = doppler_min; f <= doppler_max + 1e-9; f += doppler_step) bins.push_back(f);
  return bins;
}

CafGrid compute_caf(const IqBuffer& buffer, const PrnCode& code,
                    const std::vector<double>& doppler_bins, int noncoherent_periods) {
  const double fs = buffer.sample_rate;
  const int K = static_cast<int>(std::llround(fs * kCodePeriod));
  if (static_cast<int>(buffer.samples.size()) < K) {
    throw std::invalid_argument("compute_caf: buffer shorter than one code period");
  }
  if (doppler_bins.empty()) throw std::invalid_argument("compute_caf: no doppler bins");

  const int periods =
      std::min<int>(noncoherent_periods, static_cast<int>(buffer.samples.size()) / K);

  CafGrid grid;
  grid.doppler_bins = doppler_bins;
  grid.prn_id = code.prn_id();
  grid.K = K;
  grid.sample_rate = fs;
  grid.periods = periods;
  grid.values.assign(doppler_bins.size(), std::vector<double>(static_cast<std::size_t>(K), 0.0));

  // Local replica at zero delay, conjugated in the Fourier domain.
  FftPlan fwd(K, FFTW_FORWARD);
  FftPlan inv(K, FFTW_BACKWARD);
  std::vector<cdouble> code_fft(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    const int chip = code.chip(static_cast<int>(std::floor(k / fs * kChipRate)));
    code_fft[static_cast<std::size_t>(k)] = cdouble(chip, 0.0);
  }
  fwd.execute(code_fft.data());

  std::vector<cdouble> work(static_cast<std::size_t>(K));
  const double inv_k2 = 1.0 / (static_cast<double>(K) * K);

  for (std::size_t b = 0; b < doppler_bins.size(); ++b) {
    const double f = doppler_bins[b];
    const cdouble step = std::polar(1.0, -kTwoPi * f / fs);
    auto& row = grid.values[b];

    for (int p = 0; p < periods; ++p) {
      const std::size_t off = static_cast<std::size_t>(p) * static_cast<std::size_t>(K);
      cdouble rot = std::polar(1.0, -kTwoPi * f * (static_cast<double>(off) / fs));
      for (int k = 0; k < K; ++k) {
        const cfloat s = buffer.samples[off + static_cast<std::size_t>(k)];
        work[static_cast<std::size_t>(k)] = cdouble(s.real(), s.imag()) * rot;
        rot *= step;
      }
      fwd.execute(work.data());
      for (int k = 0; k < K; ++k) {
        work[static_cast<std::size_t>(k)] *= std::conj(code_fft[static_cast<std::size_t>(k)]);
      }
      inv.execute(work.data());
      for (int k = 0; k < K; ++k) {
        row[static_cast<std::size_t>(k)] += std::norm(work[static_cast<std::size_t>(k)]) * inv_k2;
      }
    }
    for (auto& v : row) v /= periods;
  }
  return grid;
}

double caf_noise_floor(const CafGrid& grid, const AcqConfig& config) {
  // Locate the strongest cell, then average everything outside a
  // one-chip delay band around it.
  const int K = grid.K;
  int best_delay = 0;
  double best = -1.0;
  for (const auto& row : grid.values) {
    for (int k = 0; k < K; ++k) {
      if (row[static_cast<std::size_t>(k)] > best) {
        best = row[static_cast<std::size_t>(k)];
        best_delay = k;
      }
    }
  }
  const int excl = static_cast<int>(std::ceil(config.exclusion_chips * grid.sample_rate /
                                              kChipRate));
  double sum = 0.0;
  long long count = 0;
  for (const auto& row : grid.values) {
    for (int k = 0; k < K; ++k) {
      int d = std::abs(k - best_delay);
      d = std::min(d, K - d);
      if (d <= excl) continue;
      sum += row[static_cast<std::size_t>(k)];
      ++count;
    }
  }
  return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

std::vector<AcqPeak> find_peaks(const CafGrid& grid, int max_peaks, const AcqConfig& config) {
  if (grid.values.empty() || grid.K <= 0) {
    throw std::invalid_argument("find_peaks: empty grid");
  }
  const int K = grid.K;
  const double floor = caf_noise_floor(grid, config);
  const int excl = static_cast<int>(std::ceil(config.exclusion_chips * grid.sample_rate /
                                              kChipRate));

  std::vector<char> excluded(static_cast<std::size_t>(K), 0);
  std::vector<AcqPeak> peaks;
  double strongest = 0.0;

  while (static_cast<int>(peaks.size()) < max_peaks) {
    int best_bin = -1, best_delay = 0;
    double best = -1.0;
    for (std::size_t b = 0; b < grid.values.size(); ++b) {
      const auto& row = grid.values[b];
      for (int k = 0; k < K; ++k) {
        if (excluded[static_cast<std::size_t>(k)]) continue;
        const double v = row[static_cast<std::size_t>(k)];
        if (v <= best) continue;
        // local maximum along delay; excluded neighbours still count,
        // which rejects the skirt of an already-claimed peak
        if (v < row[static_cast<std::size_t>(wrap_index(k - 1, K))] ||
            v < row[static_cast<std::size_t>(wrap_index(k + 1, K))]) {
          continue;
        }
        best = v;
        best_bin = static_cast<int>(b);
        best_delay = k;
      }
    }
    if (best_bin < 0 || (floor > 0.0 && best < config.detection_threshold * floor)) break;
    if (!peaks.empty() && best < config.sidelobe_rejection * strongest) break;
    if (peaks.empty()) strongest = best;

    const auto& row = grid.values[static_cast<std::size_t>(best_bin)];
    // Parabolic interpolation on correlation magnitude across the three
    // adjacent delay samples.
    const double y0 = std::sqrt(row[static_cast<std::size_t>(wrap_index(best_delay - 1, K))]);
    const double y1 = std::sqrt(best);
    const double y2 = std::sqrt(row[static_cast<std::size_t>(wrap_index(best_delay + 1, K))]);
    double delta = 0.0;
    const double denom = y0 - 2.0 * y1 + y2;
    if (denom < 0.0) delta = std::clamp(0.5 * (y0 - y2) / denom, -0.5, 0.5);

    AcqPeak peak;
    peak.prn_id = grid.prn_id;
    peak.code_delay = (static_cast<double>(best_delay) + delta) / grid.sample_rate;
    if (peak.code_delay < 0.0) peak.code_delay += kCodePeriod;
    peak.doppler = grid.doppler_bins[static_cast<std::size_t>(best_bin)];
    peak.peak_metric = best;
    peak.estimated_amplitude = std::sqrt(best) / K;
    peaks.push_back(peak);

    for (int d = -excl; d <= excl; ++d) {
      excluded[static_cast<std::size_t>(wrap_index(best_delay + d, K))] = 1;
    }
  }
  return peaks;
}

SpoofVerdict detect_spoofing(const std::vector<AcqPeak>& peaks, const AcqConfig& config) {
  SpoofVerdict verdict;
  verdict.peaks = peaks;
  std::sort(verdict.peaks.begin(), verdict.peaks.end(),
            [](const AcqPeak& a, const AcqPeak& b) { return a.peak_metric > b.peak_metric; });
  if (verdict.peaks.size() >= 2) {
    verdict.separation = std::abs(
        wrap_centered(verdict.peaks[0].code_delay - verdict.peaks[1].code_delay, kCodePeriod));
    verdict.spoofing = verdict.separation > config.aux_separation_threshold;
  }
  return verdict;
}

}  // namespace sicrx
