#include "sicrx/lsr.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace sicrx {

namespace {

long long floor_ll(double x) { return static_cast<long long>(std::floor(x)); }

// Complex prompt correlation over one signal-aligned code period.
cdouble correlate_period(const IqBuffer& buffer, const PrnCode& code, double doppler,
                         double code_delay, int period, int* n_out) {
  const double fs = buffer.sample_rate;
  const int K = static_cast<int>(std::llround(fs * kCodePeriod));
  const double code_freq = kChipRate * (1.0 + doppler / kCarrierFreq);
  const double t_start = code_delay + period * kCodePeriod;
  const auto s0 = static_cast<long long>(std::ceil(t_start * fs - 1e-9));
  if (s0 < 0 || s0 + K > static_cast<long long>(buffer.samples.size())) {
    *n_out = 0;
    return {};
  }

  cdouble acc{};
  cdouble rot = std::polar(1.0, -kTwoPi * doppler * (static_cast<double>(s0) / fs));
  const cdouble step = std::polar(1.0, -kTwoPi * doppler / fs);
  double cp = (static_cast<double>(s0) / fs - t_start) * code_freq;
  const double dcp = code_freq / fs;
  for (int i = 0; i < K; ++i) {
    const cfloat raw = buffer.samples[static_cast<std::size_t>(s0 + i)];
    const int chip = code.chip(static_cast<int>(floor_ll(cp) % kCodeLength));
    acc += cdouble(raw.real(), raw.imag()) * rot * static_cast<double>(chip);
    rot *= step;
    cp += dcp;
  }
  *n_out = K;
  return acc;
}

std::vector<cdouble> correlate_periods(const IqBuffer& buffer, const PrnCode& code,
                                       double doppler, double code_delay, int periods) {
  std::vector<cdouble> out;
  for (int p = 0; p < periods; ++p) {
    int n = 0;
    const cdouble r = correlate_period(buffer, code, doppler, code_delay, p, &n);
    if (n == 0) break;
    out.push_back(r);
  }
  return out;
}

// Subtract a replica defined by per-period bit signs from `buffer`.
void subtract_replica(IqBuffer& buffer, const PrnCode& code, double amplitude,
                      double code_delay, double doppler, double carrier_phase,
                      const std::vector<int>& period_bits) {
  const double fs = buffer.sample_rate;
  const double code_freq = kChipRate * (1.0 + doppler / kCarrierFreq);
  const double dcp = code_freq / fs;
  const auto n = static_cast<long long>(buffer.samples.size());
  const auto n_bits = static_cast<long long>(period_bits.size());
  if (n_bits == 0 || amplitude == 0.0) return;

  const cdouble step = std::polar(1.0, kTwoPi * doppler / fs);
  const long long block = static_cast<long long>(std::llround(fs * kCodePeriod));
  for (long long b0 = 0; b0 < n; b0 += block) {
    const long long b1 = std::min(n, b0 + block);
    const double t0 = static_cast<double>(b0) / fs;
    cdouble rot = std::polar(amplitude, kTwoPi * doppler * t0 + carrier_phase);
    double cp = (t0 - code_delay) * code_freq;
    for (long long s = b0; s < b1; ++s) {
      const long long period = floor_ll(cp / kCodeLength);
      const int bit =
          period_bits[static_cast<std::size_t>(std::clamp(period, 0LL, n_bits - 1))];
      const int chip = code.chip(static_cast<int>(floor_ll(cp) % kCodeLength));
      const cdouble v = rot * static_cast<double>(chip * bit);
      buffer.samples[static_cast<std::size_t>(s)] -=
          cfloat(static_cast<float>(v.real()), static_cast<float>(v.imag()));
      rot *= step;
      cp += dcp;
    }
  }
}

}  // namespace

double estimate_amplitude(double peak_metric, int K) {
  if (K <= 0) throw std::invalid_argument("estimate_amplitude: K must be positive");
  if (peak_metric < 0.0) throw std::invalid_argument("estimate_amplitude: negative peak metric");
  return std::sqrt(peak_metric) / static_cast<double>(K);
}

double caf_value_at(const IqBuffer& buffer, const PrnCode& code, double doppler,
                    double code_delay, int periods) {
  const auto rs = correlate_periods(buffer, code, doppler, code_delay, periods);
  if (rs.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& r : rs) acc += std::norm(r);
  return acc / static_cast<double>(rs.size());
}

AcqPeak refine_acquisition(const IqBuffer& buffer, const AcqPeak& coarse,
                           const AcqConfig& config) {
  const double fs = buffer.sample_rate;
  const int K = static_cast<int>(std::llround(fs * kCodePeriod));
  const auto code = generate_ca_code(coarse.prn_id);
  const int periods = config.noncoherent_periods;
  const double ts = 1.0 / fs;
  const double step = 12.5;  // Hz

  double tau = std::fmod(coarse.code_delay, kCodePeriod);
  if (tau < 0.0) tau += kCodePeriod;
  // keep one full sample of slack for the +-1 sample delay scan
  if (tau * fs < 1.0) tau += kCodePeriod;

  struct Cell {
    double f, tau, value;
  };
  std::vector<Cell> cells;
  auto eval = [&](double f, double t) {
    const double v = caf_value_at(buffer, code, f, t, periods);
    cells.push_back({f, t, v});
    return v;
  };

  // doppler scan across +-1 coarse bin at the coarse delay
  double f_best = coarse.doppler;
  double v_best = -1.0;
  for (double f = coarse.doppler - config.doppler_step; f <= coarse.doppler +
       config.doppler_step + 1e-9; f += step) {
    const double v = eval(f, tau);
    if (v > v_best) {
      v_best = v;
      f_best = f;
    }
  }

  // +-1 sample in delay with parabolic interpolation on the magnitude
  const double yl = std::sqrt(eval(f_best, tau - ts));
  const double y0 = std::sqrt(std::max(v_best, 0.0));
  const double yr = std::sqrt(eval(f_best, tau + ts));
  double delta = 0.0;
  const double denom = yl - 2.0 * y0 + yr;
  if (denom < 0.0) delta = std::clamp(0.5 * (yl - yr) / denom, -1.0, 1.0);
  const double tau_hat = tau + delta * ts;
  eval(f_best, tau_hat);

  // parabolic doppler touch-up at the interpolated delay
  const double gl = std::sqrt(eval(f_best - step, tau_hat));
  const double g0 = std::sqrt(eval(f_best, tau_hat));
  const double gr = std::sqrt(eval(f_best + step, tau_hat));
  const double gden = gl - 2.0 * g0 + gr;
  if (gden < 0.0) {
    const double fd = std::clamp(0.5 * (gl - gr) / gden, -1.0, 1.0);
    eval(f_best + fd * step, tau_hat);
  }

  // the coarse cell itself anchors the guarantee value >= coarse
  eval(coarse.doppler, tau);

  const auto best = std::max_element(cells.begin(), cells.end(),
                                     [](const Cell& a, const Cell& b) {
                                       return a.value < b.value;
                                     });
  AcqPeak out;
  out.prn_id = coarse.prn_id;
  out.code_delay = std::fmod(best->tau, kCodePeriod);
  out.doppler = best->f;
  out.peak_metric = best->value;
  out.estimated_amplitude = std::sqrt(best->value) / K;
  return out;
}

ExtractResult extract_phase_and_bits(const IqBuffer& buffer, const AcqPeak& peak,
                                     double duration) {
  const double fs = buffer.sample_rate;
  const int K = static_cast<int>(std::llround(fs * kCodePeriod));
  const auto code = generate_ca_code(peak.prn_id);
  double tau = std::fmod(peak.code_delay, kCodePeriod);
  if (tau < 0.0) tau += kCodePeriod;

  const int max_periods = static_cast<int>(std::min(
      (buffer.duration() - tau) / kCodePeriod, duration / kCodePeriod));
  if (max_periods < 1) {
    throw std::invalid_argument("extract_phase_and_bits: window shorter than one code period");
  }

  std::vector<cdouble> prompts;
  const double expected = std::max(peak.estimated_amplitude * K, 1e-30);
  int weak_streak = 0;
  for (int p = 0; p < max_periods; ++p) {
    int n = 0;
    const cdouble r = correlate_period(buffer, code, peak.doppler, tau, p, &n);
    if (n == 0) break;
    prompts.push_back(r);
    if (std::abs(r) < 0.3 * expected) {
      if (++weak_streak > 3) {
        throw TrackingFailure("extract_phase_and_bits: prompt power collapsed at period " +
                              std::to_string(p));
      }
    } else {
      weak_streak = 0;
    }
  }
  const auto n_periods = static_cast<int>(prompts.size());
  if (n_periods < 1) {
    throw std::invalid_argument("extract_phase_and_bits: no complete code period in buffer");
  }

  ExtractResult out;

  // residual doppler from the prompt-phase slope; squaring removes the
  // bit-sign flips
  if (n_periods >= 2) {
    cdouble acc{};
    for (int p = 0; p + 1 < n_periods; ++p) {
      const cdouble z = prompts[static_cast<std::size_t>(p + 1)] *
                        std::conj(prompts[static_cast<std::size_t>(p)]);
      acc += z * z;
    }
    if (std::abs(acc) > 0.0) {
      out.doppler_correction = 0.5 * std::arg(acc) / (kTwoPi * kCodePeriod);
    }
  }

  // re-rotate prompts onto a common phase before summing bits
  std::vector<cdouble> aligned(prompts.size());
  for (int p = 0; p < n_periods; ++p) {
    const double t_center = tau + (p + 0.5) * kCodePeriod;
    aligned[static_cast<std::size_t>(p)] =
        prompts[static_cast<std::size_t>(p)] *
        std::polar(1.0, -kTwoPi * out.doppler_correction * t_center);
  }

  // bit sync: histogram of sign transitions over the 20 period phases
  std::array<int, kPeriodsPerBit> hist{};
  for (int p = 1; p < n_periods; ++p) {
    if ((aligned[static_cast<std::size_t>(p)] * std::conj(aligned[static_cast<std::size_t>(p - 1)]))
            .real() < 0.0) {
      ++hist[static_cast<std::size_t>(p % kPeriodsPerBit)];
    }
  }
  int edge = 0, best = 0;
  for (int i = 0; i < kPeriodsPerBit; ++i) {
    if (hist[static_cast<std::size_t>(i)] > best) {
      best = hist[static_cast<std::size_t>(i)];
      edge = i;
    }
  }
  out.bit_edge_offset = edge;

  // coherent window sums; the window containing the buffer start is the
  // phase reference and is taken as bit +1
  std::vector<cdouble> window_sums;
  std::vector<std::pair<int, int>> window_span;  // [first, last) period
  int w0 = 0;
  if (edge > 0) {
    cdouble acc{};
    for (int p = 0; p < std::min(edge, n_periods); ++p) acc += aligned[static_cast<std::size_t>(p)];
    window_sums.push_back(acc);
    window_span.emplace_back(0, std::min(edge, n_periods));
    w0 = edge;
  }
  for (int p = w0; p < n_periods; p += kPeriodsPerBit) {
    cdouble acc{};
    const int last = std::min(p + kPeriodsPerBit, n_periods);
    for (int q = p; q < last; ++q) acc += aligned[static_cast<std::size_t>(q)];
    window_sums.push_back(acc);
    window_span.emplace_back(p, last);
  }

  out.carrier_phase = wrap_two_pi(std::arg(window_sums.front()));
  out.period_bits.assign(static_cast<std::size_t>(n_periods), 1);
  const cdouble ref = std::polar(1.0, out.carrier_phase);
  for (std::size_t w = 0; w < window_sums.size(); ++w) {
    const int bit = (window_sums[w] * std::conj(ref)).real() >= 0.0 ? 1 : -1;
    out.nav_bits.push_back(bit);
    for (int p = window_span[w].first; p < window_span[w].second; ++p) {
      out.period_bits[static_cast<std::size_t>(p)] = bit;
    }
  }

  double amp = 0.0;
  for (const auto& r : prompts) amp += std::abs(r);
  out.mean_amplitude = amp / (static_cast<double>(n_periods) * K);
  return out;
}

IqBuffer cancel(const IqBuffer& buffer, RecoveryEstimate& estimate, const CancelConfig& config) {
  const double fs = buffer.sample_rate;
  const int K = static_cast<int>(std::llround(fs * kCodePeriod));
  const auto code = generate_ca_code(estimate.prn_id);
  double tau = std::fmod(estimate.code_delay, kCodePeriod);
  if (tau < 0.0) tau += kCodePeriod;

  // complex CAF of the current buffer at the estimate's cell; the
  // replica's own correlation there is a*K*bit*exp(j(phi+psi)), so the
  // residual metric is a closed form in the phase offset psi
  const auto rx = correlate_periods(buffer, code, estimate.doppler, tau, config.metric_periods);
  if (rx.empty()) throw std::invalid_argument("cancel: buffer shorter than one code period");

  auto residual = [&](double psi) {
    double acc = 0.0;
    for (std::size_t p = 0; p < rx.size(); ++p) {
      const int bit =
          estimate.period_bits.empty()
              ? 1
              : estimate.period_bits[std::min(p, estimate.period_bits.size() - 1)];
      const cdouble rep = std::polar(estimate.amplitude * K * bit,
                                     estimate.carrier_phase + psi);
      acc += std::norm(rx[p] - rep);
    }
    return acc / static_cast<double>(rx.size());
  };

  // cycle over uniform phase offsets, then golden-section refine around
  // the best candidate
  double best_psi = 0.0, best_val = residual(0.0);
  for (int i = 1; i < config.phase_candidates; ++i) {
    const double psi = kTwoPi * i / config.phase_candidates;
    const double v = residual(psi);
    if (v < best_val) {
      best_val = v;
      best_psi = psi;
    }
  }
  {
    const double span = kTwoPi / config.phase_candidates;
    double a = best_psi - span, b = best_psi + span;
    const double gr = 0.6180339887498949;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = residual(c), fd = residual(d);
    for (int i = 0; i < config.golden_iterations; ++i) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - gr * (b - a);
        fc = residual(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + gr * (b - a);
        fd = residual(d);
      }
    }
    const double mid = 0.5 * (a + b);
    if (residual(mid) < best_val) {
      best_psi = mid;
      best_val = residual(mid);
    }
  }

  estimate.carrier_phase = wrap_two_pi(estimate.carrier_phase + best_psi);
  estimate.residual_metric = best_val;

  IqBuffer out = buffer;
  subtract_replica(out, code, estimate.amplitude, tau, estimate.doppler,
                   estimate.carrier_phase, estimate.period_bits);
  return out;
}

std::pair<IqBuffer, RecoveryReport> recover(const IqBuffer& buffer, const SpoofVerdict& verdict,
                                            std::size_t adversarial_peak_index, int max_iters,
                                            const RecoverConfig& config) {
  if (adversarial_peak_index >= verdict.peaks.size()) {
    throw std::invalid_argument("recover: adversarial peak index out of range");
  }
  const double fs = buffer.sample_rate;
  const int K = static_cast<int>(std::llround(fs * kCodePeriod));
  AcqPeak adv = verdict.peaks[adversarial_peak_index];
  const auto code = generate_ca_code(adv.prn_id);
  const auto bins = config.acq.doppler_bins();
  const double residue_radius = config.residue_radius_chips / kChipRate;  // s

  IqBuffer current = buffer;
  RecoveryReport report;
  double amp_scale = 1.0;

  for (int it = 0; it < max_iters; ++it) {
    const AcqPeak refined = refine_acquisition(current, adv, config.acq);

    ExtractResult ext;
    try {
      ext = extract_phase_and_bits(current, refined,
                                   std::min(config.extract_duration, current.duration()));
    } catch (const TrackingFailure& e) {
      report.failure_reason = e.what();
      break;
    }

    RecoveryEstimate est;
    est.prn_id = adv.prn_id;
    est.amplitude = estimate_amplitude(refined.peak_metric, K) * amp_scale;
    est.code_delay = refined.code_delay;
    est.doppler = refined.doppler + ext.doppler_correction;
    est.carrier_phase = ext.carrier_phase;
    est.nav_bits = ext.nav_bits;
    est.period_bits = ext.period_bits;
    est.bit_edge_offset = ext.bit_edge_offset;

    IqBuffer candidate = cancel(current, est);

    RecoveryIteration rec;
    rec.index = it + 1;
    rec.pre_smax = refined.peak_metric;
    rec.post_smax = est.residual_metric;
    rec.attenuation_db =
        est.residual_metric > 0.0
            ? power_db(refined.peak_metric / est.residual_metric)
            : 300.0;
    report.iterations = it + 1;
    report.last_estimate = est;

    if (est.residual_metric > refined.peak_metric) {
      rec.accepted = false;
      report.per_iteration.push_back(rec);
      amp_scale *= 0.5;  // damp a bad amplitude estimate and retry
      continue;
    }
    rec.accepted = true;
    current = std::move(candidate);

    const auto grid = compute_caf(current, code, bins, config.acq.noncoherent_periods);
    auto peaks = find_peaks(grid, config.acq.max_peaks, config.acq);
    rec.peaks_after = static_cast<int>(peaks.size());
    report.per_iteration.push_back(rec);

    const auto vd = detect_spoofing(peaks, config.acq);
    report.final_verdict = vd;

    if (peaks.empty()) {
      report.failure_reason = "re-acquisition found no residual peaks above threshold";
      break;
    }

    std::vector<AcqPeak> residue, legit;
    for (const auto& p : peaks) {
      const double d = std::abs(wrap_centered(p.code_delay - refined.code_delay, kCodePeriod));
      if (d <= residue_radius) {
        residue.push_back(p);
      } else if (d <= config.legit_search_radius) {
        legit.push_back(p);
      }
    }

    if (!legit.empty()) {
      const double adv_metric = residue.empty() ? 0.0 : residue.front().peak_metric;
      if (!vd.spoofing || legit.front().peak_metric >= adv_metric) {
        report.success = true;
        report.recovered_peak = legit.front();
        if (!residue.empty()) report.residual_adversarial = residue.front();
        break;
      }
    }
    if (residue.empty() && legit.empty()) {
      report.failure_reason =
          "adversarial peak cleared but no legitimate peak within the search radius";
      break;
    }
    if (!residue.empty()) adv = residue.front();
  }

  if (!report.success && report.failure_reason.empty()) {
    report.failure_reason = "max iterations exhausted without clearing the verdict";
  }
  return {std::move(current), std::move(report)};
}

void subtract_tracked(IqBuffer& buffer, const TrackResult& tracked) {
  const auto code = generate_ca_code(tracked.prn_id);
  const double fs = buffer.sample_rate;
  const auto n_periods = tracked.history.size();
  const auto n_total = static_cast<long long>(buffer.samples.size());

  for (std::size_t p = 0; p < n_periods; ++p) {
    const long long s0 = tracked.history[p].sample_counter;
    long long s1;
    if (p + 1 < n_periods) {
      s1 = tracked.history[p + 1].sample_counter;
    } else {
      s1 = s0 + static_cast<long long>(std::llround(fs * kCodePeriod));
    }
    s1 = std::min(s1, n_total);

    // complex amplitude folds in the bit sign and the residual phase
    if (s1 <= s0) continue;
    const double mag = std::abs(tracked.prompts[p]);
    if (mag <= 0.0) continue;
    const cdouble unit = tracked.prompts[p] / mag;
    const double amp = tracked.amplitudes[p];
    const double f = tracked.history[p].doppler;
    const double code_freq = tracked.code_freqs[p];
    const double t_start = tracked.period_start_time[p];

    cdouble rot = std::polar(amp, tracked.history[p].carrier_phase) * unit;
    const cdouble step = std::polar(1.0, kTwoPi * f / fs);
    double cp = (static_cast<double>(s0) / fs - t_start) * code_freq;
    const double dcp = code_freq / fs;
    for (long long s = s0; s < s1; ++s) {
      const int chip = code.chip(static_cast<int>(floor_ll(cp) % kCodeLength));
      const cdouble v = rot * static_cast<double>(chip);
      buffer.samples[static_cast<std::size_t>(s)] -=
          cfloat(static_cast<float>(v.real()), static_cast<float>(v.imag()));
      rot *= step;
      cp += dcp;
    }
  }
}

std::string RecoveryReport::to_json() const {
  nlohmann::json j;
  j["success"] = success;
  j["iterations"] = iterations;
  j["failure_reason"] = failure_reason;
  auto peak_json = [](const AcqPeak& p) {
    return nlohmann::json{{"prn", p.prn_id},
                          {"code_delay_s", p.code_delay},
                          {"doppler_hz", p.doppler},
                          {"peak_metric", p.peak_metric},
                          {"estimated_amplitude", p.estimated_amplitude}};
  };
  j["per_iteration"] = nlohmann::json::array();
  for (const auto& r : per_iteration) {
    j["per_iteration"].push_back({{"iteration", r.index},
                                  {"accepted", r.accepted},
                                  {"pre_smax", r.pre_smax},
                                  {"post_smax", r.post_smax},
                                  {"attenuation_db", r.attenuation_db},
                                  {"peaks_after", r.peaks_after}});
  }
  j["final_verdict"] = {{"spoofing", final_verdict.spoofing},
                        {"separation_s", final_verdict.separation},
                        {"num_peaks", final_verdict.peaks.size()}};
  if (success) j["recovered_peak"] = peak_json(recovered_peak);
  j["estimate"] = {{"prn", last_estimate.prn_id},
                   {"amplitude", last_estimate.amplitude},
                   {"code_delay_s", last_estimate.code_delay},
                   {"doppler_hz", last_estimate.doppler},
                   {"carrier_phase_rad", last_estimate.carrier_phase},
                   {"num_bits", last_estimate.nav_bits.size()},
                   {"residual_metric", last_estimate.residual_metric}};
  return j.dump(2);
}

}  // namespace sicrx
