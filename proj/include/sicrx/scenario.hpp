#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sicrx/geodesy.hpp"
#include "sicrx/signal.hpp"
#include "sicrx/trajectory.hpp"

namespace sicrx {

enum class TakeoverMode { kHard, kSeamless };
enum class SpoofedNavMode { kIdentical, kModified };

struct AttackerConfig {
  double power_advantage_db = 3.0;  // in [-10, +20]
  TakeoverMode takeover = TakeoverMode::kSeamless;
  SpoofedNavMode nav_mode = SpoofedNavMode::kIdentical;
  double onset = 1.0;          // s, attack start
  double ramp_duration = 2.0;  // s, seamless code-offset ramp
  // Optional explicit schedule of (time, fraction-of-target) pairs,
  // monotonically increasing in both; empty means derive a linear ramp
  // from onset/ramp_duration (or a step, in hard mode).
  std::vector<std::array<double, 2>> ramp;
  std::vector<int> prns;                      // spoofed PRNs
  std::map<int, double> code_offset_targets;  // prn -> final delay offset, s
  Vec3 spoof_offset_enu{};                    // m, spoofed minus true position
  Vec3 nav_position_offset{};                 // m, applied in modified nav mode

  // Fraction of the target code offset applied at scenario time t.
  double offset_scale(double t) const;
  void validate() const;
};

struct Scenario {
  std::vector<SatelliteSignalParams> legitimate;
  bool has_attacker = false;
  AttackerConfig attacker;
  double noise_density = 0.0;  // complex-sample variance
  double duration = 0.0;       // s
  double sample_rate = 5e6;    // Sa/s
  std::uint64_t seed = 1;
  Vec3 receiver_pos_ecef{};
  Trajectory receiver_truth;  // local NED relative to receiver_pos_ecef

  // Materialized attacker emitters: legitimate params scaled by the power
  // advantage, with per-PRN carrier phases drawn from the scenario seed
  // and nav content per nav_mode.
  std::vector<SatelliteSignalParams> attacker_params() const;

  const SatelliteSignalParams* find_legitimate(int prn) const;
  void validate(bool require_pvt_geometry = false) const;
};

// Sample-wise sum of all legitimate signals, all attacker signals
// (scaled by the power advantage and delayed per ramp), and
// circular-symmetric Gaussian noise of the configured density.
IqBuffer compose(const Scenario& scenario, double sample_rate);

struct ConstellationOptions {
  int count = 6;
  double min_projection = 0.48;  // |LOS . offset direction|, smallest satellite
  double max_projection = 0.95;
  double min_elevation_deg = 15.0;
  double range_min = 20.0e6;  // m
  double range_max = 24.5e6;  // m
  double amplitude = 1.0;
  double doppler_span = 4000.0;  // Hz, uniform draw
  int tow_offset = 16;
};

// Satellites placed along lines of sight whose projections onto the
// spoof-offset direction are spread over [min_projection, max_projection],
// so an offset of d metres yields per-satellite code-delay separations of
// roughly proj*d/c. Positions are quantized to the nav payload grid before
// delays are derived.
std::vector<SatelliteSignalParams> make_constellation(const Vec3& receiver_ecef,
                                                      const Vec3& offset_dir_enu,
                                                      std::uint64_t seed,
                                                      const ConstellationOptions& options = {});

// Per-satellite code-offset targets implied by a spoofed position offset.
std::map<int, double> derive_code_offsets(const std::vector<SatelliteSignalParams>& sats,
                                          const Vec3& receiver_ecef, const Vec3& offset_enu);

// Declarative key/value config files (see docs/scenario_format.md).
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text);
void save_scenario(const Scenario& scenario, const std::string& path);
std::string format_scenario(const Scenario& scenario);

}  // namespace sicrx
