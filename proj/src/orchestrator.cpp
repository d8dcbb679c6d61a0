#include "sicrx/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "sicrx/iq_io.hpp"

namespace sicrx {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Channel {
  TrackResult track;
  FrameSync sync;
  bool ok = false;
};

// Track the given peaks from t_start to the end of the buffer and frame-sync.
std::map<int, Channel> build_channels(const IqBuffer& buffer,
                                      const std::map<int, AcqPeak>& seeds, double t_start,
                                      const TrackConfig& config) {
  std::map<int, Channel> channels;
  const double duration = buffer.duration() - t_start - 2e-3;
  for (const auto& [prn, peak] : seeds) {
    Channel ch;
    ch.track = track_channel(buffer, peak, duration, config, t_start);
    if (!ch.track.lost_lock && ch.track.bits.size() >= NavMessage::kFrameBits + 8) {
      try {
        ch.sync = find_preamble(ch.track);
        ch.ok = true;
      } catch (const TrackingFailure&) {
        ch.ok = false;
      }
    }
    channels[prn] = std::move(ch);
  }
  return channels;
}

double track_delay_at(const TrackResult& track, double t) {
  const auto& starts = track.period_start_time;
  const auto it = std::upper_bound(starts.begin(), starts.end(), t);
  if (it == starts.begin()) throw std::out_of_range("track_delay_at: before tracked span");
  const auto p = static_cast<std::size_t>(std::distance(starts.begin(), it)) - 1;
  return std::fmod(starts[p], kCodePeriod);
}

struct FixBatch {
  std::vector<EpochRecord> records;
};

// Compute one fix per epoch over the span covered by at least four
// channels; epochs where the solver or geometry fails are skipped. When
// delay offsets are given the pseudoranges are rectified with them (the
// offsets stay constant: an identical-nav attacker clones the satellite
// doppler, so the adversarial/legitimate delay difference does not drift).
FixBatch fixes_for_epochs(const std::map<int, Channel>& channels,
                          const std::vector<DelayOffset>* offsets, double epoch,
                          double t_first, double t_last, double t_ref, const char* mode,
                          ReceiverState state) {
  FixBatch batch;
  std::map<int, SatState> states;
  for (const auto& [prn, ch] : channels) {
    if (!ch.ok) continue;
    states[prn] = SatState{{ch.sync.frame.sat_pos_ecef[0], ch.sync.frame.sat_pos_ecef[1],
                            ch.sync.frame.sat_pos_ecef[2]},
                           ch.sync.frame.tow * NavMessage::kFrameDuration};
  }

  for (double t_m = t_first; t_m <= t_last + 1e-9; t_m += epoch) {
    std::vector<ChannelObservation> obs;
    for (const auto& [prn, ch] : channels) {
      if (!ch.ok) continue;
      try {
        ChannelObservation o;
        o.prn_id = prn;
        o.t_rx = t_m;
        o.t_tx = emission_time_at(ch.track, ch.sync, t_m);
        obs.push_back(o);
      } catch (const std::out_of_range&) {
      }
    }
    if (obs.size() < 4) continue;
    try {
      PseudorangeSet pr;
      if (offsets) {
        pr = rectify(obs, *offsets, t_ref);
      } else {
        pr = compute_pseudoranges(obs, t_ref);
      }
      EpochRecord rec;
      rec.time = t_m;
      rec.state = state;
      rec.fix = solve(pr, states);
      rec.has_fix = true;
      rec.mode = mode;
      batch.records.push_back(rec);
    } catch (const std::exception&) {
      // epoch skipped: insufficient geometry or solver failure
    }
  }
  return batch;
}

AccuracyStats accuracy_vs_truth(const std::vector<EpochRecord>& epochs, const Vec3& truth,
                                const char* mode) {
  AccuracyStats stats;
  const auto truth_utm = to_utm(truth);
  double sum_e = 0.0, sum_n = 0.0, sum_h = 0.0;
  for (const auto& rec : epochs) {
    if (!rec.has_fix || std::string(rec.mode) != mode) continue;
    const double de = rec.fix.utm.easting - truth_utm.easting;
    const double dn = rec.fix.utm.northing - truth_utm.northing;
    const double dh = std::hypot(de, dn);
    sum_e += de;
    sum_n += dn;
    sum_h += dh;
    stats.max_offset = std::max(stats.max_offset, dh);
    ++stats.fix_count;
  }
  if (stats.fix_count > 0) {
    stats.mean_easting_offset = sum_e / stats.fix_count;
    stats.mean_northing_offset = sum_n / stats.fix_count;
    stats.mean_horizontal_offset = sum_h / stats.fix_count;
  }
  return stats;
}

}  // namespace

const char* to_string(ReceiverState state) {
  switch (state) {
    case ReceiverState::kClean: return "clean";
    case ReceiverState::kSpoofDetected: return "spoof_detected";
    case ReceiverState::kIdentifying: return "identifying";
    case ReceiverState::kRecovering: return "recovering";
    case ReceiverState::kRectifying: return "rectifying";
    case ReceiverState::kRecovered: return "recovered";
    case ReceiverState::kFailure: return "failure";
  }
  return "?";
}

RunReport run(const Scenario& scenario, const IqBuffer& iq, const RunConfig& config) {
  const double fs = iq.sample_rate;
  if (std::abs(fs / 1000.0 - std::round(fs / 1000.0)) > 1e-9) {
    throw std::invalid_argument("run: sample_rate must be a multiple of 1 kHz");
  }
  if (std::abs(config.epoch / kCodePeriod - std::round(config.epoch / kCodePeriod)) > 1e-9) {
    throw std::invalid_argument("run: epoch must be a multiple of 1 ms");
  }

  RunReport report;
  std::vector<int> prns = config.search_prns;
  if (prns.empty()) {
    for (int p = 1; p <= 32; ++p) prns.push_back(p);
  }
  const auto bins = config.acq.doppler_bins();
  const int n_epochs = static_cast<int>(std::floor(iq.duration() / config.epoch));

  // --- detection scan -------------------------------------------------
  // the alarm is raised at the first epoch with an auxiliary peak; flags
  // latch per PRN across epochs (a seamless ramp separates the peaks of
  // different satellites at different times), and recovery anchors where
  // the latched set stopped growing, capped so enough signal remains for
  // nav decoding afterwards
  int detection_epoch = -1;
  int stable_epoch = -1;
  std::vector<char> latched(33, 0);
  std::vector<std::map<int, SpoofVerdict>> epoch_verdicts;
  std::map<int, AcqPeak> seeds_epoch0;
  double acq_seconds = 0.0;
  std::size_t acq_samples = 0;

  for (int e = 0; e < n_epochs; ++e) {
    const double t_e = e * config.epoch;
    const auto window = slice(iq, t_e, config.acq_window);
    if (window.size() < static_cast<std::size_t>(fs * kCodePeriod)) break;
    std::map<int, SpoofVerdict> verdicts;
    const auto t0 = Clock::now();
    for (int prn : prns) {
      const auto grid = compute_caf(window, generate_ca_code(prn), bins,
                                    config.acq.noncoherent_periods);
      const auto peaks = find_peaks(grid, config.acq.max_peaks, config.acq);
      if (peaks.empty()) continue;
      verdicts[prn] = detect_spoofing(peaks, config.acq);
      if (e == 0) seeds_epoch0[prn] = verdicts[prn].peaks.front();
    }
    acq_seconds += seconds_since(t0);
    acq_samples += window.size() * prns.size();

    if (config.defense) {
      for (const auto& [prn, v] : verdicts) {
        if (v.spoofing && !latched[static_cast<std::size_t>(prn)]) {
          latched[static_cast<std::size_t>(prn)] = 1;
          if (detection_epoch < 0) detection_epoch = e;
          stable_epoch = e;
        }
      }
    }
    epoch_verdicts.push_back(std::move(verdicts));
  }
  report.acquisition_samples_per_second =
      acq_seconds > 0.0 ? static_cast<double>(acq_samples) / acq_seconds : 0.0;

  for (int e = 0; e < n_epochs; ++e) {
    EpochRecord rec;
    rec.time = e * config.epoch;
    rec.state = ReceiverState::kClean;
    report.epochs.push_back(rec);
  }

  // --- clean pipeline --------------------------------------------------
  auto run_clean = [&](const char* mode) {
    auto channels = build_channels(iq, seeds_epoch0, 0.0, config.track);
    auto batch = fixes_for_epochs(channels, nullptr, config.epoch, config.epoch,
                                  (n_epochs - 1) * config.epoch, config.t_ref, mode,
                                  ReceiverState::kClean);
    for (auto& rec : batch.records) {
      const auto idx = static_cast<std::size_t>(std::lround(rec.time / config.epoch));
      if (idx < report.epochs.size()) {
        report.epochs[idx].has_fix = true;
        report.epochs[idx].fix = rec.fix;
        report.epochs[idx].mode = rec.mode;
      }
    }
  };

  if (detection_epoch < 0) {
    report.final_state = ReceiverState::kClean;
    if (!seeds_epoch0.empty()) run_clean("clean");
    report.clean_accuracy =
        accuracy_vs_truth(report.epochs, scenario.receiver_pos_ecef, "clean");
    return report;
  }

  // --- detected --------------------------------------------------------
  report.detection_time = detection_epoch * config.epoch;
  // leave room for two nav frames plus sync slack after recovery
  const double decode_span = 2.0 * NavMessage::kFrameDuration + 0.6;
  const int cap_epoch = std::max(
      detection_epoch,
      static_cast<int>(std::floor((iq.duration() - decode_span) / config.epoch)));
  const int recovery_epoch = std::min(std::max(stable_epoch, detection_epoch), cap_epoch);
  const double t_det = recovery_epoch * config.epoch;
  for (std::size_t e = static_cast<std::size_t>(detection_epoch); e < report.epochs.size(); ++e) {
    report.epochs[e].state = ReceiverState::kSpoofDetected;
  }

  std::vector<int> spoofed_prns;
  const auto& verdicts_at_recovery = epoch_verdicts[static_cast<std::size_t>(recovery_epoch)];
  for (int prn : prns) {
    if (latched[static_cast<std::size_t>(prn)] && verdicts_at_recovery.count(prn)) {
      spoofed_prns.push_back(prn);
    }
  }
  if (spoofed_prns.empty()) {
    report.final_state = ReceiverState::kFailure;
    return report;
  }

  // --- identify ----------------------------------------------------------
  // harness mapping: the gps-derived track during the maneuver reflects
  // whether the strongest (tracked) peak belongs to the attacker, judged
  // from scenario ground truth; an externally supplied label bypasses it
  bool tracked_is_adversarial;
  if (config.external_peak_label.has_value()) {
    report.api_label.tracked_peak_is_adversarial = *config.external_peak_label;
    report.api_label.threshold = 5.0;
    tracked_is_adversarial = *config.external_peak_label;
  } else {
    bool truth_adversarial = false;
    if (scenario.has_attacker) {
      const auto& v = verdicts_at_recovery.at(spoofed_prns.front());
      const auto* legit = scenario.find_legitimate(spoofed_prns.front());
      if (legit) {
        const double legit_delay =
            legit->path_delay - (legit->doppler / kCarrierFreq) * t_det;
        const double d_legit = std::abs(
            wrap_centered(v.peaks.front().code_delay - legit_delay, kCodePeriod));
        // the tracked peak is adversarial when it does not sit on the
        // legitimate delay
        truth_adversarial = d_legit > 0.25 / kChipRate;
      }
    }
    const std::uint64_t m_seed =
        config.maneuver_seed ? config.maneuver_seed : derive_seed(scenario.seed, 0x4a91);
    const auto plan = generate_maneuver(m_seed);
    ImuModel imu;
    imu.seed = derive_seed(m_seed, 2);
    FlightSpoofState spoof_state;
    spoof_state.tracking_adversarial = truth_adversarial;
    spoof_state.model = FlightSpoofState::AttackerModel::kHoldPosition;
    const auto [imu_track, gps_track] = simulate_flight(plan, imu, spoof_state);
    report.api_label = correlate_tracks(imu_track, gps_track, 5.0);
    tracked_is_adversarial = report.api_label.tracked_peak_is_adversarial;
  }
  report.api_ran = true;

  if (!tracked_is_adversarial) {
    // ongoing attack, but the receiver is already on the legitimate
    // signals: keep operating on them
    report.final_state = ReceiverState::kClean;
    if (!seeds_epoch0.empty()) run_clean("clean");
    report.clean_accuracy =
        accuracy_vs_truth(report.epochs, scenario.receiver_pos_ecef, "clean");
    return report;
  }

  // --- recover -----------------------------------------------------------
  // sequential interference cancellation across satellites on a shared
  // window: cancel the strongest adversarial peaks, then re-run the
  // detector and repeat until it stays quiet. Attackers whose legitimate
  // peaks start out buried under the other spoofing signals surface once
  // those are stripped.
  for (std::size_t e = static_cast<std::size_t>(detection_epoch); e < report.epochs.size(); ++e) {
    report.epochs[e].state = ReceiverState::kRecovering;
  }
  IqBuffer window = slice(iq, t_det, config.recovery_window);
  std::map<int, AcqPeak> recovered_peaks;
  std::map<int, AcqPeak> adversarial_seeds;
  std::map<int, double> adversarial_delays;
  std::map<int, RecoverySummary> summaries;
  double cancel_seconds = 0.0;
  int cancel_iterations = 0;
  RecoverConfig rc = config.recover;
  rc.acq = config.acq;
  const double residue_radius = rc.residue_radius_chips / kChipRate;

  for (int round = 0; round < 4; ++round) {
    bool progress = false;

    struct Work {
      int prn;
      std::vector<AcqPeak> peaks;
    };
    std::vector<Work> work;
    for (int prn : prns) {
      if (recovered_peaks.count(prn)) continue;
      const auto grid = compute_caf(window, generate_ca_code(prn), bins,
                                    config.acq.noncoherent_periods);
      auto peaks = find_peaks(grid, config.acq.max_peaks, config.acq);
      if (peaks.empty()) continue;
      const auto verdict = detect_spoofing(peaks, config.acq);
      if (!latched[static_cast<std::size_t>(prn)] && !verdict.spoofing) continue;
      work.push_back({prn, std::move(peaks)});
    }
    std::sort(work.begin(), work.end(), [](const Work& a, const Work& b) {
      return a.peaks.front().peak_metric > b.peaks.front().peak_metric;
    });

    for (auto& item : work) {
      const int prn = item.prn;
      auto& summary = summaries[prn];
      summary.prn_id = prn;

      std::size_t adv_idx = item.peaks.size();
      if (adversarial_delays.count(prn)) {
        // this attacker was already cancelled at least once: target its
        // residue, or pick the legitimate peak directly if none is left
        double best = 0.0;
        for (std::size_t i = 0; i < item.peaks.size(); ++i) {
          const double d = std::abs(wrap_centered(
              item.peaks[i].code_delay - adversarial_delays.at(prn), kCodePeriod));
          if (d <= residue_radius && item.peaks[i].peak_metric > best) {
            best = item.peaks[i].peak_metric;
            adv_idx = i;
          }
        }
        if (adv_idx == item.peaks.size()) {
          const AcqPeak* pick = nullptr;
          for (const auto& p : item.peaks) {
            const double d = std::abs(
                wrap_centered(p.code_delay - adversarial_delays.at(prn), kCodePeriod));
            if (d > residue_radius && d <= rc.legit_search_radius) {
              pick = &p;
              break;  // peaks are ordered by metric
            }
          }
          if (pick) {
            recovered_peaks[prn] = refine_acquisition(window, *pick, config.acq);
            summary.success = true;
            summary.failure_reason.clear();
            summary.recovered_delay = recovered_peaks[prn].code_delay;
            progress = true;
          }
          continue;
        }
      } else {
        if (tracked_is_adversarial) {
          adv_idx = 0;
        } else if (item.peaks.size() >= 2) {
          adv_idx = 1;
        } else {
          continue;
        }
      }

      const auto verdict = detect_spoofing(item.peaks, config.acq);
      const auto t0 = Clock::now();
      auto [residual_win, rec_report] =
          recover(window, verdict, adv_idx, config.max_recovery_iterations, rc);
      cancel_seconds += seconds_since(t0);
      cancel_iterations += rec_report.iterations;
      window = std::move(residual_win);  // chain: later PRNs see this one removed
      progress = true;

      summary.iterations += rec_report.iterations;
      summary.success = rec_report.success;
      summary.failure_reason = rec_report.failure_reason;
      if (!rec_report.per_iteration.empty()) {
        summary.final_attenuation_db = rec_report.per_iteration.back().attenuation_db;
      }
      if (!adversarial_seeds.count(prn)) adversarial_seeds[prn] = item.peaks[adv_idx];
      adversarial_delays[prn] = rec_report.last_estimate.code_delay;
      if (rec_report.success) {
        recovered_peaks[prn] = rec_report.recovered_peak;
        summary.recovered_delay = rec_report.recovered_peak.code_delay;
        summary.failure_reason.clear();
      }
      report.recovery_reports.push_back(std::move(rec_report));
    }
    if (!progress) break;
  }

  // polish every recovered peak on the fully stripped window
  for (auto& [prn, peak] : recovered_peaks) {
    peak = refine_acquisition(window, peak, config.acq);
    summaries[prn].recovered_delay = peak.code_delay;
  }
  for (const auto& [prn, summary] : summaries) report.recoveries.push_back(summary);
  report.cancellation_iterations = cancel_iterations;
  report.seconds_per_cancellation_iteration =
      cancel_iterations > 0 ? cancel_seconds / cancel_iterations : 0.0;

  if (recovered_peaks.size() < 4) {
    report.final_state = ReceiverState::kFailure;
    return report;
  }

  // --- streaming cancellation over the rest of the buffer ---------------
  std::map<int, Channel> adversarial_channels;
  IqBuffer residual = iq;
  TrackConfig adv_cfg = config.track;
  adv_cfg.dll_bandwidth = std::max(adv_cfg.dll_bandwidth, 15.0);  // rides the offset ramp
  for (const auto& [prn, seed] : adversarial_seeds) {
    Channel ch;
    ch.track = track_channel(iq, seed, iq.duration() - t_det - 2e-3, adv_cfg, t_det);
    subtract_tracked(residual, ch.track);
    adversarial_channels[prn] = std::move(ch);
  }

  const double t_fix_first = t_det + config.epoch;
  const double t_fix_last = (n_epochs - 1) * config.epoch;

  // --- recovered path: track the legitimate peaks on the residual -------
  bool recovered_path_ok = false;
  if (config.rectifier != RectifierMode::kOn) {
    auto channels = build_channels(residual, recovered_peaks, t_det, config.track);
    int good = 0;
    for (const auto& [prn, ch] : channels) good += ch.ok;
    if (good >= 4) {
      auto batch = fixes_for_epochs(channels, nullptr, config.epoch, t_fix_first,
                                    t_fix_last, config.t_ref, "recovered",
                                    ReceiverState::kRecovered);
      if (!batch.records.empty()) {
        recovered_path_ok = true;
        for (auto& rec : batch.records) {
          const auto idx = static_cast<std::size_t>(std::lround(rec.time / config.epoch));
          if (idx < report.epochs.size()) {
            report.epochs[idx].has_fix = true;
            report.epochs[idx].fix = rec.fix;
            report.epochs[idx].mode = "recovered";
            report.epochs[idx].state = ReceiverState::kRecovered;
          }
        }
      }
    }
  }

  // --- pseudorange rectifier ---------------------------------------------
  if (!recovered_path_ok && config.rectifier != RectifierMode::kOff) {
    for (std::size_t e = static_cast<std::size_t>(detection_epoch); e < report.epochs.size();
         ++e) {
      report.epochs[e].state = ReceiverState::kRectifying;
    }
    // frame sync on the adversarial channels (identical nav assumed)
    int good = 0;
    for (auto& [prn, ch] : adversarial_channels) {
      if (!ch.track.lost_lock && ch.track.bits.size() >= NavMessage::kFrameBits + 8) {
        try {
          ch.sync = find_preamble(ch.track);
          ch.ok = true;
          ++good;
        } catch (const TrackingFailure&) {
        }
      }
    }
    if (good >= 4) {
      // delay offsets averaged over several epochs: tau_at from the
      // adversarial tracker, tau_l re-acquired on the residual around the
      // recovered peak propagated with its doppler. The common oscillator
      // drift sweeps every signal through all sub-sample phases, so the
      // averaging cancels the estimators' sub-sample interpolation biases.
      const int n_slices = 5;
      std::vector<DelayOffset> offsets;
      for (const auto& [prn, peak] : recovered_peaks) {
        if (!adversarial_channels.count(prn) || !adversarial_channels.at(prn).ok) continue;
        const double drift = peak.doppler / kCarrierFreq;
        double delta_sum = 0.0;
        int delta_count = 0;
        double tau_at_mid = 0.0;
        for (int k = 0; k < n_slices; ++k) {
          const double t_raw =
              t_fix_first + (t_fix_last - 20e-3 - t_fix_first) * k / (n_slices - 1);
          const double t_k = std::floor(t_raw / kCodePeriod) * kCodePeriod;
          AcqPeak pred = peak;
          pred.code_delay =
              std::fmod(peak.code_delay - drift * (t_k - t_det) + kCodePeriod, kCodePeriod);
          try {
            const auto refined =
                refine_acquisition(slice(residual, t_k, 10e-3), pred, config.acq);
            const double tau_at = track_delay_at(adversarial_channels.at(prn).track, t_k);
            delta_sum += wrap_centered(tau_at - refined.code_delay, kCodePeriod);
            ++delta_count;
            if (k == n_slices / 2) tau_at_mid = tau_at;
          } catch (const std::exception&) {
          }
        }
        if (delta_count == 0) continue;
        DelayOffset d;
        d.prn_id = prn;
        d.tau_at = tau_at_mid;
        d.tau_l = tau_at_mid - delta_sum / delta_count;
        offsets.push_back(d);
      }

      auto batch = fixes_for_epochs(adversarial_channels, &offsets, config.epoch,
                                    t_fix_first, t_fix_last, config.t_ref, "rectified",
                                    ReceiverState::kRectifying);
      if (!batch.records.empty()) {
        recovered_path_ok = true;
        for (auto& rec : batch.records) {
          const auto idx = static_cast<std::size_t>(std::lround(rec.time / config.epoch));
          if (idx < report.epochs.size()) {
            report.epochs[idx].has_fix = true;
            report.epochs[idx].fix = rec.fix;
            report.epochs[idx].mode = "rectified";
            report.epochs[idx].state = ReceiverState::kRecovered;
          }
        }
      }
    }
  }

  report.final_state = recovered_path_ok ? ReceiverState::kRecovered : ReceiverState::kFailure;
  if (recovered_path_ok) {
    for (auto& rec : report.epochs) {
      if (rec.state == ReceiverState::kRecovering || rec.state == ReceiverState::kRectifying) {
        if (rec.has_fix) rec.state = ReceiverState::kRecovered;
      }
    }
  }
  report.accuracy = accuracy_vs_truth(report.epochs, scenario.receiver_pos_ecef, "recovered");
  const auto rectified_stats =
      accuracy_vs_truth(report.epochs, scenario.receiver_pos_ecef, "rectified");
  if (rectified_stats.fix_count > 0) report.accuracy = rectified_stats;
  report.clean_accuracy = accuracy_vs_truth(report.epochs, scenario.receiver_pos_ecef, "clean");
  return report;
}

std::string RunReport::to_text() const {
  std::ostringstream out;
  out << "final_state: " << to_string(final_state) << "\n";
  out << "detection_time_s: " << detection_time << "\n";
  if (api_ran) {
    out << "api: tracked_peak_is_adversarial=" << api_label.tracked_peak_is_adversarial
        << " mean_deviation_m=" << api_label.mean_deviation << " threshold_m="
        << api_label.threshold << "\n";
  }
  for (const auto& r : recoveries) {
    out << "recovery prn=" << r.prn_id << " success=" << r.success
        << " iterations=" << r.iterations << " final_attenuation_db=" << r.final_attenuation_db;
    if (!r.failure_reason.empty()) out << " reason=\"" << r.failure_reason << "\"";
    out << "\n";
  }
  auto print_stats = [&](const char* name, const AccuracyStats& s) {
    if (s.fix_count == 0) return;
    out << name << ": fixes=" << s.fix_count << " mean_easting_offset_m="
        << s.mean_easting_offset << " mean_northing_offset_m=" << s.mean_northing_offset
        << " mean_horizontal_offset_m=" << s.mean_horizontal_offset
        << " max_offset_m=" << s.max_offset << "\n";
  };
  print_stats("accuracy", accuracy);
  print_stats("clean_accuracy", clean_accuracy);
  out << "timing: cancellation_iterations=" << cancellation_iterations
      << " seconds_per_iteration=" << seconds_per_cancellation_iteration
      << " acquisition_samples_per_second=" << acquisition_samples_per_second << "\n";
  int fixes = 0;
  for (const auto& e : epochs) fixes += e.has_fix;
  out << "epochs: " << epochs.size() << " fixes: " << fixes << "\n";
  return out.str();
}

void write_track_csv(const RunReport& report, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw FormatError("write_track_csv: cannot open " + path);
  f << "time,easting,northing,alt,clock_bias,residual_rms,mode\n";
  f.precision(12);
  for (const auto& rec : report.epochs) {
    if (!rec.has_fix) continue;
    const auto geo = ecef_to_geodetic(rec.fix.position_ecef);
    f << rec.time << ',' << rec.fix.utm.easting << ',' << rec.fix.utm.northing << ','
      << geo.height_m << ',' << rec.fix.clock_bias << ',' << rec.fix.residual_rms << ','
      << rec.mode << '\n';
  }
}

Scenario build_scenario(const ScenarioOptions& options) {
  Scenario sc;
  sc.duration = options.duration;
  sc.sample_rate = options.sample_rate;
  sc.seed = options.seed;
  sc.receiver_pos_ecef = geodetic_to_ecef(options.receiver);
  // noise density for the requested C/N0 at unit amplitude
  sc.noise_density = options.sample_rate / db_to_linear_power(options.cn0_dbhz);

  Vec3 dir = options.offset_dir_enu;
  if (norm(dir) < 1e-12) dir = {0.0, 0.0, 1.0};
  dir = scale(dir, 1.0 / norm(dir));
  ConstellationOptions copt;
  copt.count = options.satellite_count;
  sc.legitimate = make_constellation(sc.receiver_pos_ecef, dir, options.seed, copt);

  if (options.with_attacker) {
    sc.has_attacker = true;
    sc.attacker.power_advantage_db = options.power_advantage_db;
    sc.attacker.takeover = options.takeover;
    sc.attacker.nav_mode = options.nav_mode;
    sc.attacker.onset = options.onset;
    sc.attacker.ramp_duration = options.ramp_duration;
    sc.attacker.spoof_offset_enu = scale(dir, options.offset_m);
    for (const auto& s : sc.legitimate) sc.attacker.prns.push_back(s.prn_id);
    sc.attacker.code_offset_targets =
        derive_code_offsets(sc.legitimate, sc.receiver_pos_ecef, sc.attacker.spoof_offset_enu);
  }
  sc.receiver_truth.samples = {{0.0, {0.0, 0.0, 0.0}}, {sc.duration, {0.0, 0.0, 0.0}}};
  sc.validate(options.satellite_count >= 4);
  return sc;
}

RunReport run_scenario_file(const std::string& scenario_path, const RunConfig& config,
                            const std::string& out_dir, const std::string& iq_path) {
  const Scenario scenario = load_scenario(scenario_path);
  IqBuffer iq;
  if (!iq_path.empty()) {
    iq = load_iq(iq_path);
  } else {
    iq = compose(scenario, scenario.sample_rate);
  }
  RunReport report = run(scenario, iq, config);

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream(out_dir + "/report.txt", std::ios::trunc) << report.to_text();
    write_track_csv(report, out_dir + "/track.csv");
    if (!report.recovery_reports.empty()) {
      std::ostringstream all;
      all << "[\n";
      for (std::size_t i = 0; i < report.recovery_reports.size(); ++i) {
        all << report.recovery_reports[i].to_json();
        if (i + 1 < report.recovery_reports.size()) all << ",";
        all << "\n";
      }
      all << "]\n";
      std::ofstream(out_dir + "/recovery_report.json", std::ios::trunc) << all.str();
    }
  }
  return report;
}

std::vector<SweepCell> sweep(SweepKind kind, const SweepParams& params) {
  std::vector<SweepCell> cells;
  for (std::size_t i = 0; i < params.values.size(); ++i) {
    SweepCell cell;
    cell.value = params.values[i];
    cell.seed = derive_seed(params.base_seed, i);

    ScenarioOptions opt;
    opt.receiver = params.receiver;
    opt.satellite_count = params.satellite_count;
    opt.duration = params.duration;
    opt.sample_rate = params.sample_rate;
    opt.cn0_dbhz = params.cn0_dbhz;
    opt.seed = cell.seed;
    opt.onset = params.onset;
    opt.ramp_duration = params.ramp_duration;
    if (kind == SweepKind::kPeakSeparation) {
      opt.offset_m = params.values[i];
      opt.power_advantage_db = params.fixed_power_db;
    } else {
      opt.offset_m = params.fixed_offset_m;
      opt.power_advantage_db = params.values[i];
    }

    try {
      const Scenario sc = build_scenario(opt);
      double min_sep = 1.0;
      for (const auto& [prn, off] : sc.attacker.code_offset_targets) {
        min_sep = std::min(min_sep, std::abs(off));
      }
      cell.min_separation_ns = min_sep * 1e9;

      const auto iq = compose(sc, sc.sample_rate);
      const auto report = run(sc, iq, params.run_config);
      cell.completed = true;
      cell.final_state = report.final_state;
      cell.mean_offset_m = report.accuracy.mean_horizontal_offset;
      cell.max_offset_m = report.accuracy.max_offset;
      cell.fix_count = report.accuracy.fix_count;
      for (const auto& e : report.epochs) {
        cell.used_rectifier |= std::string(e.mode) == "rectified";
      }
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    cells.push_back(cell);
  }
  return cells;
}

void write_sweep_csv(const std::vector<SweepCell>& cells, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw FormatError("write_sweep_csv: cannot open " + path);
  f << "value,seed,completed,min_separation_ns,mean_offset_m,max_offset_m,fix_count,"
       "used_rectifier,final_state,error\n";
  for (const auto& c : cells) {
    f << c.value << ',' << c.seed << ',' << c.completed << ',' << c.min_separation_ns << ','
      << c.mean_offset_m << ',' << c.max_offset_m << ',' << c.fix_count << ','
      << c.used_rectifier << ',' << to_string(c.final_state) << ",\"" << c.error << "\"\n";
  }
}

std::string BenchmarkReport::to_text() const {
  std::ostringstream out;
  out << "sample_rate: " << sample_rate << "\n";
  out << "samples: " << samples << "\n";
  out << "acquisition_seconds_per_epoch: " << acquisition_seconds_per_epoch << "\n";
  out << "acquisition_samples_per_second: " << acquisition_samples_per_second << "\n";
  out << "cancellation_iterations: " << iterations << "\n";
  out << "seconds_per_cancellation_iteration: " << seconds_per_cancellation_iteration << "\n";
  return out.str();
}

BenchmarkReport benchmark(const IqBuffer& iq, int iterations, const RunConfig& config) {
  BenchmarkReport rep;
  rep.sample_rate = iq.sample_rate;
  rep.samples = iq.samples.size();
  rep.iterations = iterations;

  const auto bins = config.acq.doppler_bins();
  const auto window = slice(iq, 0.0, std::min(iq.duration(), config.acq_window));

  // acquisition scan over the full constellation
  AcqPeak strongest;
  {
    const auto t0 = Clock::now();
    for (int prn = 1; prn <= 32; ++prn) {
      const auto grid =
          compute_caf(window, generate_ca_code(prn), bins, config.acq.noncoherent_periods);
      const auto peaks = find_peaks(grid, config.acq.max_peaks, config.acq);
      if (!peaks.empty() && peaks.front().peak_metric > strongest.peak_metric) {
        strongest = peaks.front();
      }
    }
    const double dt = seconds_since(t0);
    rep.acquisition_seconds_per_epoch = dt;
    rep.acquisition_samples_per_second = 32.0 * static_cast<double>(window.size()) / dt;
  }

  // cancellation workload: use the real auxiliary pair when present,
  // otherwise inject a +6 dB offset replica of the strongest signal
  IqBuffer work = slice(iq, 0.0, std::min(iq.duration(), 0.1));
  if (strongest.peak_metric <= 0.0) {
    // nothing acquired (pure noise input): synthesize a carrier for the
    // cancellation loop to operate on
    SatelliteSignalParams p{7, 1.0, 300e-6, 1000.0, 0.5, NavMessage(7, {2.0e7, 1.0e7, 8.0e6})};
    const auto sig = synthesize_signal(p, work.duration(), work.sample_rate);
    for (std::size_t k = 0; k < work.samples.size(); ++k) work.samples[k] += sig.samples[k];
    strongest = AcqPeak{7, 300e-6, 1000.0, std::pow(work.sample_rate * 1e-3, 2.0), 1.0};
  }
  {
    const auto grid = compute_caf(work, generate_ca_code(strongest.prn_id), bins,
                                  config.acq.noncoherent_periods);
    const auto peaks = find_peaks(grid, config.acq.max_peaks, config.acq);
    const auto verdict = detect_spoofing(peaks, config.acq);
    if (!verdict.spoofing) {
      SatelliteSignalParams extra{strongest.prn_id,
                                  strongest.estimated_amplitude * db_to_linear_amplitude(6.0),
                                  strongest.code_delay + 1.5e-6,
                                  strongest.doppler,
                                  1.234,
                                  NavMessage(strongest.prn_id, {2.0e7, 1.0e7, 8.0e6})};
      const auto sig = synthesize_signal(extra, work.duration(), work.sample_rate);
      for (std::size_t k = 0; k < work.samples.size(); ++k) work.samples[k] += sig.samples[k];
    }
  }

  const int K = static_cast<int>(std::llround(work.sample_rate * kCodePeriod));
  const auto t0 = Clock::now();
  for (int i = 0; i < iterations; ++i) {
    const auto refined = refine_acquisition(work, strongest, config.acq);
    const auto ext =
        extract_phase_and_bits(work, refined, std::min(work.duration(), 0.05));
    RecoveryEstimate est;
    est.prn_id = refined.prn_id;
    est.amplitude = estimate_amplitude(refined.peak_metric, K);
    est.code_delay = refined.code_delay;
    est.doppler = refined.doppler + ext.doppler_correction;
    est.carrier_phase = ext.carrier_phase;
    est.nav_bits = ext.nav_bits;
    est.period_bits = ext.period_bits;
    cancel(work, est);  // timing the full iteration; buffer left untouched
  }
  rep.seconds_per_cancellation_iteration = seconds_since(t0) / std::max(iterations, 1);
  return rep;
}

}  // namespace sicrx
