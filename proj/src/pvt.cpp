#include "sicrx/pvt.hpp"

#include <cmath>
#include <string>

namespace sicrx {

namespace {

// 4x4 solve by Gaussian elimination with partial pivoting; returns the
// pivot-based condition estimate through `cond`.
bool solve4(double a[4][4], double b[4], double x[4], double* cond) {
  int idx[4] = {0, 1, 2, 3};
  double max_pivot = 0.0, min_pivot = 1e300;
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r) {
      if (std::abs(a[idx[r]][col]) > std::abs(a[idx[pivot]][col])) pivot = r;
    }
    std::swap(idx[col], idx[pivot]);
    const double p = a[idx[col]][col];
    if (std::abs(p) < 1e-300) return false;
    max_pivot = std::max(max_pivot, std::abs(p));
    min_pivot = std::min(min_pivot, std::abs(p));
    for (int r = col + 1; r < 4; ++r) {
      const double f = a[idx[r]][col] / p;
      for (int c = col; c < 4; ++c) a[idx[r]][c] -= f * a[idx[col]][c];
      b[idx[r]] -= f * b[idx[col]];
    }
  }
  *cond = max_pivot / min_pivot;
  for (int row = 3; row >= 0; --row) {
    double acc = b[idx[row]];
    for (int c = row + 1; c < 4; ++c) acc -= a[idx[row]][c] * x[c];
    x[row] = acc / a[idx[row]][row];
  }
  return true;
}

}  // namespace

PvtSolution solve(const PseudorangeSet& pr, const std::map<int, SatState>& sat_states) {
  struct Obs {
    Vec3 sat;
    double range;
  };
  std::vector<Obs> obs;
  for (const auto& e : pr.entries) {
    const auto it = sat_states.find(e.prn_id);
    if (it == sat_states.end()) continue;
    obs.push_back({it->second.pos_ecef, e.pseudorange});
  }
  if (obs.size() < 4) {
    throw InsufficientSatellites("pvt: need >= 4 satellites with known states, have " +
                                 std::to_string(obs.size()));
  }

  Vec3 p{0.0, 0.0, 0.0};
  double bias_m = 0.0;
  double cond = 0.0;
  int iter = 0;
  for (; iter < 20; ++iter) {
    double ata[4][4] = {};
    double atb[4] = {};
    for (const auto& o : obs) {
      const Vec3 d = sub(o.sat, p);
      const double rho = norm(d);
      if (rho < 1.0) throw SolverError("pvt: iterate collapsed onto a satellite", 0.0);
      const double row[4] = {-d[0] / rho, -d[1] / rho, -d[2] / rho, 1.0};
      const double res = o.range - (rho + bias_m);
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) ata[i][j] += row[i] * row[j];
        atb[i] += row[i] * res;
      }
    }
    double dx[4];
    if (!solve4(ata, atb, dx, &cond)) {
      throw SolverError("pvt: singular geometry", 1e300);
    }
    if (cond > 1e10) {
      throw SolverError("pvt: ill-conditioned geometry (cond " + std::to_string(cond) + ")",
                        cond);
    }
    p = add(p, {dx[0], dx[1], dx[2]});
    bias_m += dx[3];
    const double step = std::sqrt(dx[0] * dx[0] + dx[1] * dx[1] + dx[2] * dx[2]);
    if (!std::isfinite(step) || step > 1e9) {
      throw SolverError("pvt: diverged (step " + std::to_string(step) + ")", cond);
    }
    if (step < 1e-3) {
      ++iter;
      break;
    }
  }

  PvtSolution sol;
  sol.position_ecef = p;
  sol.clock_bias = bias_m / kSpeedOfLight;
  sol.num_sats = static_cast<int>(obs.size());
  sol.iterations = iter;
  sol.time = pr.t_rx;
  double ss = 0.0;
  for (const auto& o : obs) {
    const double r = o.range - (norm(sub(o.sat, p)) + bias_m);
    ss += r * r;
  }
  sol.residual_rms = std::sqrt(ss / static_cast<double>(obs.size()));
  if (std::abs(sol.clock_bias) >= 0.5) {
    throw SolverError("pvt: clock bias implausible (" + std::to_string(sol.clock_bias) + " s)",
                      cond);
  }
  try {
    sol.utm = to_utm(p);
  } catch (const UnsupportedZone&) {
    sol.utm = UtmCoord{};  // zone 0: outside the UTM band
  }
  return sol;
}

}  // namespace sicrx
