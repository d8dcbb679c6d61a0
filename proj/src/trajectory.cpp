#include "sicrx/trajectory.hpp"

#include <fstream>

namespace sicrx {

Vec3 Trajectory::at(double t) const {
  if (samples.empty()) return {};
  if (t <= samples.front().t) return samples.front().pos;
  if (t >= samples.back().t) return samples.back().pos;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (t <= samples[i].t) {
      const auto& a = samples[i - 1];
      const auto& b = samples[i];
      const double u = (t - a.t) / (b.t - a.t);
      return add(scale(a.pos, 1.0 - u), scale(b.pos, u));
    }
  }
  return samples.back().pos;
}

void write_trajectory_csv(const Trajectory& track, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw FormatError("write_trajectory_csv: cannot open " + path);
  f << "t,x,y,z\n";
  for (const auto& s : track.samples) {
    f << s.t << ',' << s.pos[0] << ',' << s.pos[1] << ',' << s.pos[2] << '\n';
  }
}

}  // namespace sicrx
