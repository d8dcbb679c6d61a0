#include "sicrx/pvt.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "sicrx/scenario.hpp"

using namespace sicrx;

namespace {

const Vec3 kRxEcef = geodetic_to_ecef({37.7749 * kPi / 180.0, -122.4194 * kPi / 180.0, 50.0});

struct Problem {
  PseudorangeSet pr;
  std::map<int, SatState> states;
  Vec3 truth;
  double bias_m;
};

// Ranges synthesized from a known position + clock bias.
Problem make_problem(const Vec3& truth, double bias_m, std::uint64_t seed, int count = 6) {
  Problem prob;
  prob.truth = truth;
  prob.bias_m = bias_m;
  const auto sats = make_constellation(truth, {0.2, 0.3, 0.93}, seed,
                                       ConstellationOptions{.count = count});
  for (const auto& s : sats) {
    const Vec3 pos = {s.nav.sat_pos_ecef()[0], s.nav.sat_pos_ecef()[1],
                      s.nav.sat_pos_ecef()[2]};
    prob.states[s.prn_id] = SatState{pos, 0.0};
    prob.pr.entries.push_back({s.prn_id, norm(sub(pos, truth)) + bias_m, false});
  }
  prob.pr.t_rx = 3.0;
  prob.pr.t_ref = 70e-3;
  return prob;
}

}  // namespace

TEST_CASE("noiseless inverse problem is recovered to a centimetre") {
  const auto prob = make_problem(kRxEcef, 1234.5, 5);
  const auto sol = solve(prob.pr, prob.states);
  CHECK(norm(sub(sol.position_ecef, prob.truth)) < 1e-2);
  CHECK(sol.clock_bias * kSpeedOfLight == doctest::Approx(1234.5).epsilon(1e-6));
  CHECK(sol.residual_rms < 1e-2);
  CHECK(sol.num_sats == 6);
  CHECK(sol.utm.zone == 10);
}

TEST_CASE("a common-mode range bias is absorbed entirely by the clock") {
  auto prob = make_problem(kRxEcef, 0.0, 8);
  const auto base = solve(prob.pr, prob.states);
  const double extra = kSpeedOfLight * 1e-6;  // c * 1 us
  for (auto& e : prob.pr.entries) e.pseudorange += extra;
  const auto shifted = solve(prob.pr, prob.states);

  CHECK(norm(sub(shifted.position_ecef, base.position_ecef)) < 1e-2);
  CHECK((shifted.clock_bias - base.clock_bias) == doctest::Approx(1e-6).epsilon(1e-6));
}

TEST_CASE("translation equivariance") {
  const Vec3 shift = {2500.0, -1800.0, 3100.0};
  auto prob = make_problem(kRxEcef, 50.0, 21);
  const auto base = solve(prob.pr, prob.states);

  Problem moved = prob;
  moved.truth = add(prob.truth, shift);
  for (auto& [prn, st] : moved.states) st.pos_ecef = add(st.pos_ecef, shift);
  // same ranges: both satellites and truth moved together
  const auto sol = solve(moved.pr, moved.states);
  CHECK(norm(sub(sol.position_ecef, add(base.position_ecef, shift))) < 1e-2);
}

TEST_CASE("residuals grow monotonically with injected range noise") {
  std::mt19937_64 rng(71);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto prob = make_problem(kRxEcef, 0.0, 13, 8);
  std::vector<double> draw;
  for (std::size_t i = 0; i < prob.pr.entries.size(); ++i) draw.push_back(gauss(rng));

  double prev = -1.0;
  for (double sigma : {0.0, 1.0, 4.0, 16.0}) {
    auto noisy = prob;
    for (std::size_t i = 0; i < noisy.pr.entries.size(); ++i) {
      noisy.pr.entries[i].pseudorange += sigma * draw[i];
    }
    const auto sol = solve(noisy.pr, noisy.states);
    CHECK(sol.residual_rms >= prev);
    prev = sol.residual_rms;
  }
  CHECK(prev > 1.0);
}

TEST_CASE("fewer than four satellites is an error") {
  auto prob = make_problem(kRxEcef, 0.0, 2, 4);
  prob.pr.entries.pop_back();
  CHECK_THROWS_AS(solve(prob.pr, prob.states), InsufficientSatellites);

  // unknown PRN states count as missing too
  auto prob2 = make_problem(kRxEcef, 0.0, 3, 4);
  prob2.states.erase(prob2.states.begin());
  CHECK_THROWS_AS(solve(prob2.pr, prob2.states), InsufficientSatellites);
}

TEST_CASE("degenerate geometry raises a solver error with diagnostics") {
  // four satellites stacked on one line of sight
  PseudorangeSet pr;
  std::map<int, SatState> states;
  for (int prn = 1; prn <= 4; ++prn) {
    const Vec3 pos = add(kRxEcef, scale({0.1, 0.2, 0.97}, 2.0e7 + prn * 1.0e5));
    states[prn] = SatState{pos, 0.0};
    pr.entries.push_back({prn, norm(sub(pos, kRxEcef)), false});
  }
  pr.t_rx = 0.0;
  CHECK_THROWS_AS(solve(pr, states), SolverError);
}
