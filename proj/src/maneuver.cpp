#include "sicrx/maneuver.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace sicrx {

double ManeuverPlan::path_length() const {
  double len = 0.0;
  for (const auto& s : segments) len += norm(s.velocity) * s.duration;
  return len;
}

double ManeuverPlan::max_displacement() const {
  // |p(t)| along a constant-velocity leg is convex, so vertices suffice
  double best = 0.0;
  Vec3 pos{};
  for (const auto& s : segments) {
    pos = add(pos, scale(s.velocity, s.duration));
    best = std::max(best, norm(pos));
  }
  return best;
}

int ManeuverPlan::turn_count(double min_turn_deg) const {
  int turns = 0;
  for (std::size_t i = 1; i < segments.size(); ++i) {
    const Vec3& a = segments[i - 1].velocity;
    const Vec3& b = segments[i].velocity;
    const double na = norm(a), nb = norm(b);
    if (na < 1e-9 || nb < 1e-9) continue;
    const double c = std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
    if (std::acos(c) >= min_turn_deg * kPi / 180.0) ++turns;
  }
  return turns;
}

bool ManeuverPlan::satisfies(const ManeuverConstraints& c) const {
  return total_duration >= c.min_duration && total_duration <= c.max_duration &&
         path_length() >= c.min_path_length && turn_count(c.min_turn_deg) >= 1 &&
         max_displacement() > c.no_maneuver_radius;
}

ManeuverPlan generate_maneuver(std::uint64_t seed, const ManeuverConstraints& c) {
  if (c.max_speed <= 0.0 || c.max_speed < c.min_speed || c.max_duration < c.min_duration ||
      c.max_segments < c.min_segments || c.min_segments < 2 ||
      c.max_speed * c.max_duration < c.min_path_length) {
    throw std::invalid_argument("generate_maneuver: unsatisfiable constraints");
  }

  std::mt19937_64 rng(derive_seed(seed, 0x3a9e57));
  std::uniform_int_distribution<int> seg_count(c.min_segments, c.max_segments);
  std::uniform_real_distribution<double> seg_dur(c.min_segment_duration, c.max_segment_duration);
  std::uniform_real_distribution<double> speed(c.min_speed, c.max_speed);
  std::uniform_real_distribution<double> heading0(0.0, kTwoPi);
  std::uniform_real_distribution<double> turn(c.min_turn_deg * kPi / 180.0,
                                              150.0 * kPi / 180.0);
  std::bernoulli_distribution left_right(0.5);

  for (int attempt = 0; attempt < 10000; ++attempt) {
    ManeuverPlan plan;
    plan.seed = seed;
    const int n = seg_count(rng);
    double heading = heading0(rng);
    for (int i = 0; i < n; ++i) {
      if (i > 0) heading += (left_right(rng) ? 1.0 : -1.0) * turn(rng);
      const double v = speed(rng);
      ManeuverPlan::Segment s;
      s.velocity = {v * std::cos(heading), v * std::sin(heading), 0.0};
      s.duration = seg_dur(rng);
      plan.total_duration += s.duration;
      plan.segments.push_back(s);
      if (plan.total_duration > c.max_duration) break;
    }
    if (plan.satisfies(c)) return plan;
  }
  throw std::runtime_error("generate_maneuver: rejection sampling failed");
}

double ImuModel::expected_drift(double t) const {
  // mean magnitude of a 2-D Gaussian walk: sigma(t) * sqrt(pi/2)
  return walk_sigma * std::sqrt(t) * std::sqrt(kPi / 2.0);
}

namespace {

Vec3 truth_position(const ManeuverPlan& plan, double hold, double t) {
  if (t <= hold) return {};
  double elapsed = hold;
  Vec3 pos{};
  for (const auto& s : plan.segments) {
    const double in_seg = std::min(t - elapsed, s.duration);
    if (in_seg > 0.0) pos = add(pos, scale(s.velocity, in_seg));
    elapsed += s.duration;
    if (t <= elapsed) break;
  }
  return pos;
}

Vec3 attacker_position(const ManeuverPlan& plan, const FlightSpoofState& spoof,
                       const FlightOptions& opt, double t) {
  switch (spoof.model) {
    case FlightSpoofState::AttackerModel::kHoldPosition:
      return {};
    case FlightSpoofState::AttackerModel::kHoldLastCourse:
      return scale(opt.pre_course_velocity, t);
    case FlightSpoofState::AttackerModel::kPredictSegments: {
      // the attacker reproduces the hold and the first k legs, then
      // extrapolates the last predicted velocity
      double predicted_end = opt.hold_duration;
      Vec3 last_vel{};
      const int k = std::min<int>(spoof.predicted_segments,
                                  static_cast<int>(plan.segments.size()));
      for (int i = 0; i < k; ++i) {
        predicted_end += plan.segments[static_cast<std::size_t>(i)].duration;
        last_vel = plan.segments[static_cast<std::size_t>(i)].velocity;
      }
      if (t <= predicted_end) return truth_position(plan, opt.hold_duration, t);
      return add(truth_position(plan, opt.hold_duration, predicted_end),
                 scale(last_vel, t - predicted_end));
    }
  }
  return {};
}

}  // namespace

std::pair<Trajectory, Trajectory> simulate_flight(const ManeuverPlan& plan, const ImuModel& imu,
                                                  const FlightSpoofState& spoof_state,
                                                  const FlightOptions& options) {
  if (plan.segments.empty()) throw std::invalid_argument("simulate_flight: empty plan");
  const double dt = 1.0 / options.gps_rate;
  const double total = options.hold_duration + plan.total_duration;

  std::mt19937_64 walk_rng(derive_seed(imu.seed, 0x1a2b3));
  std::mt19937_64 gps_rng(derive_seed(imu.seed, 0x9c8d7));
  std::normal_distribution<double> unit(0.0, 1.0);

  Trajectory imu_track, gps_track;
  Vec3 walk{};
  const double step_sigma = imu.walk_sigma * std::sqrt(dt);
  const double bias_accel = imu.bias_drift;

  for (double t = 0.0; t <= total + 1e-9; t += dt) {
    const Vec3 truth = truth_position(plan, options.hold_duration, t);

    if (t > 0.0) {
      walk[0] += step_sigma * unit(walk_rng);
      walk[1] += step_sigma * unit(walk_rng);
      // deterministic bias ramp, off by default
      walk[0] += 0.5 * bias_accel * dt * dt;
    }
    imu_track.samples.push_back({t, add(truth, walk)});

    Vec3 fix;
    if (spoof_state.tracking_adversarial) {
      fix = attacker_position(plan, spoof_state, options, t);
    } else {
      fix = truth;
    }
    fix[0] += options.gps_noise_sigma_h * unit(gps_rng);
    fix[1] += options.gps_noise_sigma_h * unit(gps_rng);
    fix[2] += options.gps_noise_sigma_v * unit(gps_rng);
    gps_track.samples.push_back({t, fix});
  }
  return {std::move(imu_track), std::move(gps_track)};
}

PeakLabel correlate_tracks(const Trajectory& imu_track, const Trajectory& gps_track,
                           double threshold) {
  const double t0 = std::max(imu_track.start_time(), gps_track.start_time());
  const double t1 = std::min(imu_track.end_time(), gps_track.end_time());

  double acc = 0.0;
  int count = 0;
  for (const auto& s : imu_track.samples) {
    if (s.t < t0 - 1e-9 || s.t > t1 + 1e-9) continue;
    const Vec3 g = gps_track.at(s.t);
    acc += norm(sub(s.pos, g));
    ++count;
  }
  if (count < 2) {
    throw InsufficientData("correlate_tracks: fewer than 2 overlapping samples");
  }

  PeakLabel label;
  label.threshold = threshold;
  label.mean_deviation = acc / count;
  label.tracked_peak_is_adversarial = label.mean_deviation > threshold;
  return label;
}

}  // namespace sicrx
