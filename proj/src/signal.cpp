#include "sicrx/signal.hpp"

#include <cmath>
#include <stdexcept>

namespace sicrx {

namespace {
constexpr double kChipsPerBit = kCodeLength * kPeriodsPerBit;  // 20460

long long floor_ll(double x) { return static_cast<long long>(std::floor(x)); }
}  // namespace

void SatelliteSignalParams::validate() const {
  if (amplitude < 0.0) throw std::invalid_argument("signal params: amplitude must be >= 0");
  if (std::abs(doppler) > 10e3) throw std::invalid_argument("signal params: |doppler| > 10 kHz");
  if (carrier_phase < 0.0 || carrier_phase >= kTwoPi) {
    throw std::invalid_argument("signal params: carrier_phase must lie in [0, 2*pi)");
  }
}

void add_signal(IqBuffer& out, const SatelliteSignalParams& params, const DelayFn& delay) {
  params.validate();
  const PrnCode code = generate_ca_code(params.prn_id);
  const double fs = out.sample_rate;
  const std::size_t n = out.samples.size();
  const std::size_t block_len = static_cast<std::size_t>(std::llround(fs * kCodePeriod));
  const double dcp = kChipRate / fs;  // chips per sample within a block
  const cdouble carrier_step = std::polar(1.0, kTwoPi * params.doppler / fs);

  for (std::size_t b0 = 0; b0 < n; b0 += block_len) {
    const double t0 = static_cast<double>(b0) / fs;
    const double d = delay(t0);
    const std::size_t b1 = std::min(n, b0 + block_len);

    double cp = (t0 - d) * kChipRate;  // chip position at block start
    long long g = floor_ll(cp / kChipsPerBit);
    double next_edge = (static_cast<double>(g) + 1.0) * kChipsPerBit;
    int bitval = params.nav.bit(g);
    cdouble carrier =
        std::polar(params.amplitude, kTwoPi * params.doppler * t0 + params.carrier_phase);

    for (std::size_t k = b0; k < b1; ++k) {
      if (cp >= next_edge) {
        ++g;
        bitval = params.nav.bit(g);
        next_edge += kChipsPerBit;
      }
      const int chip = code.chip(static_cast<int>(floor_ll(cp) % kCodeLength));
      const cdouble v = carrier * static_cast<double>(chip * bitval);
      out.samples[k] += cfloat(static_cast<float>(v.real()), static_cast<float>(v.imag()));
      cp += dcp;
      carrier *= carrier_step;
    }
  }
}

IqBuffer synthesize_signal(const SatelliteSignalParams& params, double duration,
                           double sample_rate) {
  if (duration < kCodePeriod) {
    throw std::invalid_argument("synthesize_signal: duration must be >= 1 ms");
  }
  if (sample_rate < 2.0 * kChipRate) {
    throw std::invalid_argument("synthesize_signal: sample_rate below Nyquist (2.046 MHz)");
  }
  IqBuffer out;
  out.sample_rate = sample_rate;
  out.start_time = 0.0;
  out.samples.assign(static_cast<std::size_t>(std::llround(duration * sample_rate)), cfloat{});

  const double drift = params.doppler / kCarrierFreq;  // code-Doppler, s of delay per s
  const double d0 = params.path_delay;
  add_signal(out, params, [d0, drift](double t) { return d0 - drift * t; });
  return out;
}

IqBuffer slice(const IqBuffer& in, double t0, double dur) {
  IqBuffer out;
  out.sample_rate = in.sample_rate;
  const auto first = static_cast<std::size_t>(
      std::max(0.0, std::round((t0 - in.start_time) * in.sample_rate)));
  const auto count = static_cast<std::size_t>(std::max(0.0, std::round(dur * in.sample_rate)));
  const auto last = std::min(in.samples.size(), first + count);
  out.start_time = in.start_time + static_cast<double>(first) / in.sample_rate;
  if (first < last) {
    out.samples.assign(in.samples.begin() + static_cast<std::ptrdiff_t>(first),
                       in.samples.begin() + static_cast<std::ptrdiff_t>(last));
  }
  return out;
}

}  // namespace sicrx
