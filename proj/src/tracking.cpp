#include "sicrx/tracking.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "sicrx/ca_code.hpp"

namespace sicrx {

namespace {

// 2nd-order loop filter, critically damped (zeta = 0.707).
class LoopFilter {
 public:
  explicit LoopFilter(double bandwidth_hz) {
    const double wn = bandwidth_hz / 0.53;
    k1_ = wn * wn;
    k2_ = 1.414 * wn;
  }
  double update(double error, double dt) {
    vel_ += k1_ * error * dt;
    return vel_ + k2_ * error;
  }

 private:
  double k1_, k2_, vel_ = 0.0;
};

int chip_at(const PrnCode& code, double phase) {
  int idx = static_cast<int>(std::floor(phase));
  if (idx >= kCodeLength) idx -= kCodeLength;
  if (idx < 0) idx += kCodeLength;
  return code.chip(idx);
}

}  // namespace

TrackResult track_channel(const IqBuffer& buffer, const AcqPeak& start, double duration,
                          const TrackConfig& config, double start_at) {
  const double fs = buffer.sample_rate;
  const auto n_total = static_cast<long long>(buffer.samples.size());
  const auto code = generate_ca_code(start.prn_id);

  TrackResult out;
  out.prn_id = start.prn_id;
  out.sample_rate = fs;

  // begin at the first code-period boundary at or after start_at
  double tau = std::fmod(start.code_delay, kCodePeriod);
  if (tau < 0.0) tau += kCodePeriod;
  double period_start = tau;
  if (start_at > period_start) {
    period_start += std::ceil((start_at - period_start) / kCodePeriod) * kCodePeriod;
  }
  long long s = static_cast<long long>(std::ceil(period_start * fs - 1e-9));

  double code_phase = (static_cast<double>(s) / fs - period_start) * kChipRate;
  double carrier_freq = start.doppler;
  double carrier_phase = wrap_two_pi(kTwoPi * carrier_freq * (static_cast<double>(s) / fs));
  double dll_corr = 0.0;

  LoopFilter dll(config.dll_bandwidth);
  LoopFilter pll(config.pll_bandwidth);

  const double expected_prompt = std::sqrt(std::max(start.peak_metric, 0.0));
  const long long end_sample =
      std::min(n_total, s + static_cast<long long>(std::llround(duration * fs)));
  const double spacing = config.correlator_spacing;

  double unlocked_time = 0.0;
  bool prev_valid = false;
  cdouble prev_prompt{};
  std::array<int, kPeriodsPerBit> transition_hist{};
  double f_base = start.doppler;
  int pull_in_remaining = std::max(config.pull_in_periods, 0);
  cdouble slope_acc{};

  while (true) {
    const double code_freq =
        kChipRate * (1.0 + carrier_freq / kCarrierFreq) + dll_corr;  // chips/s
    const double dcp = code_freq / fs;
    const double phase_step = kTwoPi * carrier_freq / fs;

    // enough samples left for this period?
    const auto needed =
        static_cast<long long>(std::ceil((kCodeLength - code_phase) / dcp)) + 1;
    if (s + needed >= end_sample) break;

    cdouble early{}, prompt{}, late{};
    cdouble rot = std::polar(1.0, -carrier_phase);
    const cdouble step = std::polar(1.0, -phase_step);
    const long long s0 = s;
    double cp = code_phase;
    while (cp < kCodeLength) {
      const cfloat raw = buffer.samples[static_cast<std::size_t>(s)];
      const cdouble y = cdouble(raw.real(), raw.imag()) * rot;
      prompt += y * static_cast<double>(chip_at(code, cp));
      early += y * static_cast<double>(chip_at(code, cp + spacing));
      late += y * static_cast<double>(chip_at(code, cp - spacing));
      rot *= step;
      cp += dcp;
      ++s;
    }
    const long long n_samples = s - s0;
    const double t_int = static_cast<double>(n_samples) / fs;

    // discriminators
    const double mag_e = std::abs(early), mag_l = std::abs(late);
    const double dll_err =
        (mag_e + mag_l) > 0.0 ? 0.5 * (mag_l - mag_e) / (mag_e + mag_l) : 0.0;  // chips
    const double pll_err =
        std::abs(prompt) > 0.0 ? std::atan(prompt.imag() / prompt.real()) : 0.0;  // rad

    // snapshot describes the period just integrated
    ChannelState snap;
    snap.prn_id = start.prn_id;
    snap.code_delay = std::fmod(period_start, kCodePeriod);
    snap.doppler = carrier_freq;
    snap.carrier_phase = wrap_two_pi(carrier_phase);
    snap.sample_counter = s0;
    const double prompt_mag = std::abs(prompt);
    snap.locked = expected_prompt <= 0.0 || prompt_mag > config.lock_fraction * expected_prompt;

    out.history.push_back(snap);
    out.period_start_time.push_back(period_start);
    out.prompts.push_back(prompt);
    out.amplitudes.push_back(prompt_mag / static_cast<double>(n_samples));
    out.code_freqs.push_back(code_freq);

    if (prev_valid) {
      if ((prompt * std::conj(prev_prompt)).real() < 0.0) {
        ++transition_hist[(out.history.size() - 1) % kPeriodsPerBit];
      }
      if (pull_in_remaining > 0) {
        const cdouble z = prompt * std::conj(prev_prompt);
        slope_acc += z * z;
      }
    }
    prev_prompt = prompt;
    prev_valid = true;

    if (!snap.locked) {
      unlocked_time += t_int;
      if (unlocked_time > config.lock_timeout) {
        out.lost_lock = true;
        out.lock_lost_at = period_start;
        break;
      }
    } else {
      unlocked_time = 0.0;
    }

    // loop updates (1 ms cadence); the carrier loop stays open until the
    // handoff frequency snap has been applied
    if (pull_in_remaining > 0) {
      if (--pull_in_remaining == 0 && std::abs(slope_acc) > 0.0) {
        f_base += 0.5 * std::arg(slope_acc) / (kTwoPi * t_int);
        carrier_freq = f_base;
      }
    } else {
      carrier_freq = f_base + pll.update(pll_err, t_int) / kTwoPi;
    }
    dll_corr = -dll.update(dll_err, t_int);

    // exact period boundary crossing, sub-sample
    const double overshoot = (cp - kCodeLength) / dcp;  // samples past the edge
    period_start = (static_cast<double>(s) - overshoot) / fs;
    code_phase = cp - kCodeLength;
    carrier_phase = wrap_two_pi(carrier_phase + phase_step * static_cast<double>(n_samples));
  }

  // bit sync from the prompt-sign transition histogram
  int edge = 0, best = 0;
  for (int i = 0; i < kPeriodsPerBit; ++i) {
    if (transition_hist[static_cast<std::size_t>(i)] > best) {
      best = transition_hist[static_cast<std::size_t>(i)];
      edge = i;
    }
  }
  out.bit_edge_offset = edge;

  // demodulate: coherent 20 ms prompt accumulations on the bit grid
  const auto n_periods = static_cast<long long>(out.prompts.size());
  for (long long b0 = edge;; b0 += kPeriodsPerBit) {
    if (b0 + kPeriodsPerBit > n_periods) break;
    cdouble acc{};
    for (int i = 0; i < kPeriodsPerBit; ++i) acc += out.prompts[static_cast<std::size_t>(b0 + i)];
    BitObservation bit;
    bit.value = acc.real() >= 0.0 ? 1 : -1;
    bit.start_period = b0;
    out.bits.push_back(bit);
  }
  return out;
}

TrackResult track(const IqBuffer& buffer, const AcqPeak& start, double duration,
                  const TrackConfig& config, double start_at) {
  TrackResult result = track_channel(buffer, start, duration, config, start_at);
  if (result.lost_lock) {
    throw TrackingFailure("track: loss of lock on PRN " + std::to_string(start.prn_id) +
                          " at t=" + std::to_string(result.lock_lost_at));
  }
  return result;
}

FrameSync find_preamble(const TrackResult& tracked) {
  const int frame_bits = NavMessage::kFrameBits;
  const auto& bits = tracked.bits;
  const auto n = static_cast<int>(bits.size());
  if (n < 2 * frame_bits) {
    throw TrackingFailure("find_preamble: need at least two frames of bits, have " +
                          std::to_string(n));
  }

  std::vector<std::uint8_t> raw(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) raw[static_cast<std::size_t>(i)] = bits[i].value < 0 ? 1 : 0;

  auto matches_preamble = [&](int at, bool inverted) {
    for (int i = 0; i < 8; ++i) {
      std::uint8_t b = raw[static_cast<std::size_t>(at + i)];
      if (inverted) b ^= 1;
      if (b != ((NavMessage::kPreamble >> (7 - i)) & 1u)) return false;
    }
    return true;
  };

  for (int i = 0; i + frame_bits + 8 <= n; ++i) {
    for (bool inverted : {false, true}) {
      if (!matches_preamble(i, inverted) || !matches_preamble(i + frame_bits, inverted)) {
        continue;
      }
      const auto f0 = NavMessage::decode_frame(&raw[static_cast<std::size_t>(i)], inverted);
      if (!f0) continue;
      // when the second frame is fully visible its checksum and tow
      // continuity must hold as well
      if (i + 2 * frame_bits <= n) {
        const auto f1 =
            NavMessage::decode_frame(&raw[static_cast<std::size_t>(i + frame_bits)], inverted);
        if (!f1 || f1->tow != f0->tow + 1) continue;
      }

      FrameSync sync;
      sync.frame = *f0;
      sync.inverted = inverted;
      sync.preamble_bit_index = i;
      sync.preamble_period_index = bits[i].start_period;
      const auto p = static_cast<std::size_t>(bits[i].start_period);
      sync.toa = tracked.period_start_time[p];
      sync.preamble_sample_index = tracked.history[p].sample_counter;
      return sync;
    }
  }
  throw TrackingFailure("find_preamble: no frame-spaced preamble pair found");
}

double emission_time_at(const TrackResult& tracked, const FrameSync& sync, double t_rx) {
  const auto& starts = tracked.period_start_time;
  if (starts.empty() || t_rx < starts.front() || t_rx >= starts.back()) {
    throw std::out_of_range("emission_time_at: epoch outside the tracked span");
  }
  const auto it = std::upper_bound(starts.begin(), starts.end(), t_rx);
  const auto p = static_cast<std::size_t>(std::distance(starts.begin(), it)) - 1;

  const double code_freq =
      kChipRate * (1.0 + tracked.history[p].doppler / kCarrierFreq);  // chips/s
  const double chips_in = (t_rx - starts[p]) * code_freq;
  return sync.frame.tow * NavMessage::kFrameDuration +
         static_cast<double>(static_cast<long long>(p) - sync.preamble_period_index) *
             kCodePeriod +
         chips_in / kChipRate;
}

}  // namespace sicrx
