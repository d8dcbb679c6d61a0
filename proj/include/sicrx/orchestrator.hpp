#pragma once

#include <optional>
#include <string>

#include "sicrx/lsr.hpp"
#include "sicrx/maneuver.hpp"
#include "sicrx/pvt.hpp"
#include "sicrx/scenario.hpp"
#include "sicrx/tracking.hpp"

namespace sicrx {

enum class ReceiverState {
  kClean,
  kSpoofDetected,
  kIdentifying,
  kRecovering,
  kRectifying,
  kRecovered,
  kFailure
};

const char* to_string(ReceiverState state);

enum class RectifierMode { kAuto, kOn, kOff };

struct RunConfig {
  bool defense = true;  // detector + identifier + retriever active
  RectifierMode rectifier = RectifierMode::kAuto;
  double epoch = 1.0;            // s, detector cadence and fix cadence
  double acq_window = 8e-3;      // s per acquisition scan
  double recovery_window = 0.1;  // s handed to the retriever
  int max_recovery_iterations = 5;
  double t_ref = 70e-3;  // s, common-reception anchor
  AcqConfig acq;
  TrackConfig track;
  RecoverConfig recover;
  // receiver searches these PRNs (cold start over the full constellation
  // by default)
  std::vector<int> search_prns;
  std::uint64_t maneuver_seed = 0;  // 0: derived from the scenario seed
  // externally supplied identifier outcome (the flight-controller split);
  // unset runs the simulated maneuver
  std::optional<bool> external_peak_label;
};

struct EpochRecord {
  double time = 0.0;
  ReceiverState state = ReceiverState::kClean;
  bool has_fix = false;
  PvtSolution fix;
  const char* mode = "clean";  // clean | spoofed | recovered | rectified
};

struct RecoverySummary {
  int prn_id = 0;
  bool success = false;
  int iterations = 0;
  double final_attenuation_db = 0.0;
  double recovered_delay = 0.0;  // s
  std::string failure_reason;
};

struct AccuracyStats {
  int fix_count = 0;
  double mean_easting_offset = 0.0;    // m, signed mean vs truth
  double mean_northing_offset = 0.0;   // m
  double mean_horizontal_offset = 0.0; // m, mean norm
  double max_offset = 0.0;             // m
};

struct RunReport {
  std::vector<EpochRecord> epochs;
  ReceiverState final_state = ReceiverState::kClean;
  double detection_time = -1.0;  // s, -1 when never triggered
  PeakLabel api_label;
  bool api_ran = false;
  std::vector<RecoverySummary> recoveries;
  std::vector<RecoveryReport> recovery_reports;
  AccuracyStats accuracy;        // recovered/rectified fixes vs truth
  AccuracyStats clean_accuracy;  // clean-mode fixes vs truth
  // timing
  double seconds_per_cancellation_iteration = 0.0;
  int cancellation_iterations = 0;
  double acquisition_samples_per_second = 0.0;

  std::string to_text() const;
};

// Drives detect -> identify -> recover -> (rectify) -> PVT over the
// buffer in epoch steps.
RunReport run(const Scenario& scenario, const IqBuffer& iq, const RunConfig& config);

// Loads the scenario, composes (or loads) the IQ stream, runs the
// pipeline and writes report.txt, track.csv and recovery_report.json
// under out_dir (when non-empty).
RunReport run_scenario_file(const std::string& scenario_path, const RunConfig& config,
                            const std::string& out_dir = "",
                            const std::string& iq_path = "");

void write_track_csv(const RunReport& report, const std::string& path);

// ---------------------------------------------------------------------------

enum class SweepKind { kPeakSeparation, kPowerAdvantage };

struct SweepParams {
  std::vector<double> values;  // offsets in m, or power advantages in dB
  double fixed_offset_m = 1500.0;     // for the power sweep
  double fixed_power_db = 3.0;        // for the separation sweep
  Geodetic receiver{37.7749 * kPi / 180.0, -122.4194 * kPi / 180.0, 50.0};
  int satellite_count = 6;
  double duration = 8.0;      // s
  double sample_rate = 5e6;   // Sa/s
  double cn0_dbhz = 46.0;
  double onset = 1.0;         // s
  double ramp_duration = 1.5; // s
  std::uint64_t base_seed = 1;
  RunConfig run_config;
};

struct SweepCell {
  double value = 0.0;          // the swept parameter
  std::uint64_t seed = 0;
  bool completed = false;
  std::string error;
  double min_separation_ns = 0.0;  // smallest per-satellite delay offset
  double mean_offset_m = 0.0;      // recovered horizontal offset vs truth
  double max_offset_m = 0.0;
  int fix_count = 0;
  bool used_rectifier = false;
  ReceiverState final_state = ReceiverState::kClean;
};

// Builds one scenario per grid value (per-cell seeds) and tabulates the
// recovered-location error; per-cell failures are recorded and the sweep
// continues.
std::vector<SweepCell> sweep(SweepKind kind, const SweepParams& params);

void write_sweep_csv(const std::vector<SweepCell>& cells, const std::string& path);

// Scenario construction shared by the CLI and the sweeps.
struct ScenarioOptions {
  Geodetic receiver{37.7749 * kPi / 180.0, -122.4194 * kPi / 180.0, 50.0};
  int satellite_count = 6;
  double duration = 8.0;
  double sample_rate = 5e6;
  double cn0_dbhz = 46.0;
  std::uint64_t seed = 1;
  bool with_attacker = true;
  double power_advantage_db = 3.0;
  TakeoverMode takeover = TakeoverMode::kSeamless;
  SpoofedNavMode nav_mode = SpoofedNavMode::kIdentical;
  double onset = 1.0;
  double ramp_duration = 1.5;
  Vec3 offset_dir_enu = {0.35, 0.1, 0.93};
  double offset_m = 1500.0;
};

Scenario build_scenario(const ScenarioOptions& options);

// ---------------------------------------------------------------------------

struct BenchmarkReport {
  double sample_rate = 0.0;
  std::size_t samples = 0;
  int iterations = 0;
  double seconds_per_cancellation_iteration = 0.0;
  double acquisition_samples_per_second = 0.0;
  double acquisition_seconds_per_epoch = 0.0;

  std::string to_text() const;
};

// Times one acquisition scan and repeated cancellation iterations on the
// given stream. When the stream holds no auxiliary peak, a +6 dB offset
// replica of the strongest acquired signal is injected so the
// cancellation path has something to chew on.
BenchmarkReport benchmark(const IqBuffer& iq, int iterations, const RunConfig& config = {});

}  // namespace sicrx
