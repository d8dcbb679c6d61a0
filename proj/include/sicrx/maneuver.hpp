#pragma once

#include <cstdint>

#include "sicrx/common.hpp"
#include "sicrx/trajectory.hpp"

namespace sicrx {

struct InsufficientData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ManeuverConstraints {
  double min_duration = 10.0;  // s
  double max_duration = 20.0;  // s
  double min_speed = 3.0;      // m/s
  double max_speed = 8.0;      // m/s
  double min_path_length = 30.0;     // m
  double min_turn_deg = 30.0;        // heading change between segments
  double no_maneuver_radius = 20.0;  // m around the trigger point
  int min_segments = 3;
  int max_segments = 6;
  double min_segment_duration = 2.0;  // s
  double max_segment_duration = 5.0;  // s
};

// Pseudorandom sequence of constant-velocity legs in local NED.
struct ManeuverPlan {
  struct Segment {
    Vec3 velocity{};   // m/s, NED
    double duration = 0.0;  // s
  };
  std::vector<Segment> segments;
  double total_duration = 0.0;
  std::uint64_t seed = 0;

  double path_length() const;
  // largest displacement from the trigger point along the path
  double max_displacement() const;
  int turn_count(double min_turn_deg) const;
  bool satisfies(const ManeuverConstraints& constraints) const;
};

// Rejection-samples until every plan invariant holds; a pure function of
// the seed. Throws std::invalid_argument for unsatisfiable constraints.
ManeuverPlan generate_maneuver(std::uint64_t seed,
                               const ManeuverConstraints& constraints = {});

struct ImuModel {
  double random_walk_rate = 1590.0;  // m/hr, headline drift-rate bound
  double walk_sigma = 0.35;          // m/sqrt(s) per horizontal axis
  double bias_drift = 0.0;           // m/s^2
  std::uint64_t seed = 1;

  // expected dead-reckoning drift magnitude after `t` seconds
  double expected_drift(double t) const;
};

// What the GPS receiver reports during the maneuver.
struct FlightSpoofState {
  bool tracking_adversarial = false;
  enum class AttackerModel {
    kHoldPosition,    // spoofed fix frozen at the trigger point
    kHoldLastCourse,  // spoofed fix continues the pre-stop course
    kPredictSegments  // attacker reproduces the first k legs, then extrapolates
  } model = AttackerModel::kHoldLastCourse;
  int predicted_segments = 0;  // k, for kPredictSegments
};

struct FlightOptions {
  double gps_rate = 5.0;        // Hz, fix cadence
  double hold_duration = 2.0;   // s of stop-and-hold before the maneuver
  double gps_noise_sigma_h = 1.5;  // m per horizontal axis
  double gps_noise_sigma_v = 0.0;  // m vertical
  Vec3 pre_course_velocity = {5.0, 0.0, 0.0};  // m/s, course before the stop
};

// Simulates the stop-and-hold plus the maneuver: the IMU track is the
// true kinematics plus integrated random walk; the GPS track is the true
// kinematics plus fix noise when tracking legitimate signals, or the
// attacker's predicted trajectory when tracking adversarial signals.
std::pair<Trajectory, Trajectory> simulate_flight(const ManeuverPlan& plan, const ImuModel& imu,
                                                  const FlightSpoofState& spoof_state,
                                                  const FlightOptions& options = {});

struct PeakLabel {
  bool tracked_peak_is_adversarial = false;
  double mean_deviation = 0.0;  // m
  double threshold = 0.0;       // m
};

// Mean Euclidean distance between the time-aligned tracks (gps resampled
// onto the imu timestamps over the overlapping span), labelled against
// the threshold. Throws InsufficientData below two overlapping samples.
PeakLabel correlate_tracks(const Trajectory& imu_track, const Trajectory& gps_track,
                           double threshold = 5.0);

}  // namespace sicrx
