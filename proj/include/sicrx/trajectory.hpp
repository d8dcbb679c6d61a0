#pragma once

#include <string>
#include <vector>

#include "sicrx/geodesy.hpp"

namespace sicrx {

// Timestamped 3-D position track in a local NED frame (m).
struct Trajectory {
  struct Sample {
    double t = 0.0;
    Vec3 pos{};
  };
  std::vector<Sample> samples;

  // Linear interpolation; clamps outside the sampled span.
  Vec3 at(double t) const;
  double start_time() const { return samples.empty() ? 0.0 : samples.front().t; }
  double end_time() const { return samples.empty() ? 0.0 : samples.back().t; }
};

void write_trajectory_csv(const Trajectory& track, const std::string& path);

}  // namespace sicrx
