#include "sicrx/lsr.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sicrx/scenario.hpp"

using namespace sicrx;

namespace {

SatelliteSignalParams make_params(int prn, double a, double delay, double doppler, double phase) {
  SatelliteSignalParams p{prn, a, delay, doppler, phase, NavMessage(prn, {2.0e7, 1.0e7, 8.0e6})};
  return p;
}

IqBuffer add_buffers(IqBuffer a, const IqBuffer& b) {
  for (std::size_t k = 0; k < a.samples.size(); ++k) a.samples[k] += b.samples[k];
  return a;
}

AcqPeak acquire_strongest(const IqBuffer& buf, int prn, const AcqConfig& cfg = {}) {
  const auto grid = compute_caf(buf, generate_ca_code(prn), cfg.doppler_bins());
  const auto peaks = find_peaks(grid, 1, cfg);
  REQUIRE(!peaks.empty());
  AcqPeak p = peaks.front();
  p.prn_id = prn;
  return p;
}

}  // namespace

TEST_CASE("amplitude inversion from the peak metric") {
  CHECK(estimate_amplitude(1e8, 10000) == doctest::Approx(1.0));
  CHECK(estimate_amplitude(4e8, 10000) == doctest::Approx(2.0));
  CHECK(estimate_amplitude(0.0, 500) == 0.0);
  CHECK_THROWS_AS(estimate_amplitude(1e8, 0), std::invalid_argument);
  CHECK_THROWS_AS(estimate_amplitude(-1.0, 100), std::invalid_argument);
}

TEST_CASE("noiseless closed-loop amplitude estimate is exact within 1%") {
  const double fs = 5e6;
  const int K = 5000;
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> ud(0.0, kCodePeriod);
  std::uniform_real_distribution<double> uf(-4000.0, 4000.0);
  std::uniform_real_distribution<double> up(0.0, kTwoPi);
  for (int trial = 0; trial < 4; ++trial) {
    auto p = make_params(6, 2.0, ud(rng), uf(rng), up(rng));
    const auto buf = synthesize_signal(p, 8e-3, fs);
    const auto coarse = acquire_strongest(buf, 6);
    const auto refined = refine_acquisition(buf, coarse);
    CHECK(estimate_amplitude(refined.peak_metric, K) == doctest::Approx(2.0).epsilon(0.01));
  }
}

TEST_CASE("amplitude error shrinks with the attacker's power advantage") {
  const double fs = 5e6;
  const int K = 5000;
  auto measure_error = [&](double adv_db, std::uint64_t seed) {
    std::mt19937_64 rng(derive_seed(seed, 17));
    std::uniform_real_distribution<double> ud(100e-6, 900e-6);
    std::uniform_real_distribution<double> uf(-3000.0, 3000.0);
    std::uniform_real_distribution<double> up(0.0, kTwoPi);
    const double tau = ud(rng);
    const double f = uf(rng);
    const double a_at = db_to_linear_amplitude(adv_db);
    auto legit = make_params(8, 1.0, tau, f, up(rng));
    auto attacker = make_params(8, a_at, tau + 1.4e-6, f, up(rng));
    auto buf = add_buffers(synthesize_signal(legit, 8e-3, fs),
                           synthesize_signal(attacker, 8e-3, fs));
    testing::add_noise(buf, 125.0, derive_seed(seed, 18));
    const auto coarse = acquire_strongest(buf, 8);
    const auto refined = refine_acquisition(buf, coarse);
    return std::abs(estimate_amplitude(refined.peak_metric, K) - a_at) / a_at;
  };

  double err3 = 0.0, err10 = 0.0;
  const int seeds = 6;
  for (int s = 0; s < seeds; ++s) {
    err3 += measure_error(3.0, 100 + static_cast<std::uint64_t>(s));
    err10 += measure_error(10.0, 200 + static_cast<std::uint64_t>(s));
  }
  err3 /= seeds;
  err10 /= seeds;
  CHECK(err10 < err3);
  CHECK(err10 < 0.05);
  CHECK(err3 < 0.15);
}

TEST_CASE("refined doppler lands within 25 Hz") {
  const double fs = 5e6;
  auto p = make_params(3, 1.0, 410e-6, 1230.0, 0.8);
  const auto buf = synthesize_signal(p, 8e-3, fs);

  AcqPeak coarse = acquire_strongest(buf, 3);
  CHECK(coarse.doppler == 1250.0);  // nearest 250 Hz bin
  const auto refined = refine_acquisition(buf, coarse);
  CHECK(std::abs(refined.doppler - 1230.0) <= 25.0);
  CHECK(refined.peak_metric >= coarse.peak_metric * 0.999);
  // sub-sample delay recovery
  CHECK(std::abs(refined.code_delay - 410e-6) < 0.2 / fs);
}

TEST_CASE("refinement is a fixed point on an exact coarse estimate") {
  const double fs = 5e6;
  auto p = make_params(15, 1.0, 0.0002, 1500.0, 0.0);  // exactly on grid and bin
  const auto buf = synthesize_signal(p, 8e-3, fs);
  AcqPeak coarse;
  coarse.prn_id = 15;
  coarse.code_delay = 0.0002;
  coarse.doppler = 1500.0;
  coarse.peak_metric = caf_value_at(buf, generate_ca_code(15), 1500.0, 0.0002, 4);
  const auto refined = refine_acquisition(buf, coarse);
  CHECK(std::abs(refined.code_delay - 0.0002) < 0.05 / fs);
  CHECK(std::abs(refined.doppler - 1500.0) < 12.5);
  CHECK(refined.peak_metric >= coarse.peak_metric);
}

TEST_CASE("extraction recovers phase and the exact bit sequence") {
  const double fs = 5e6;
  const double tau = 730e-6;
  auto p = make_params(19, 1.0, tau, -2222.0, kPi / 3.0);
  const auto buf = synthesize_signal(p, 0.1, fs);
  const auto coarse = acquire_strongest(buf, 19);
  const auto refined = refine_acquisition(buf, coarse);
  const auto ext = extract_phase_and_bits(buf, refined, 0.1);

  // phase measured modulo the bit-sign convention (first window = +1)
  const auto g0 = static_cast<long long>(std::floor((tau + 1e-9 - p.path_delay) * kBitRate));
  const int b0 = p.nav.bit(g0);
  const double expected = wrap_two_pi(kPi / 3.0 + (b0 < 0 ? kPi : 0.0));
  const double derr = std::abs(wrap_centered(ext.carrier_phase - expected, kTwoPi));
  CHECK(derr < 0.05);

  // every demodulated bit matches ground truth up to the global polarity
  REQUIRE(!ext.nav_bits.empty());
  int wrong = 0;
  for (std::size_t w = 0; w < ext.period_bits.size(); ++w) {
    const double t_mid = tau + (static_cast<double>(w) + 0.5) * kCodePeriod;
    const auto g = static_cast<long long>(std::floor((t_mid - p.path_delay) * kBitRate));
    if (ext.period_bits[w] * b0 != p.nav.bit(g)) ++wrong;
  }
  CHECK(wrong == 0);
}

TEST_CASE("perfect replica subtraction suppresses the peak by 40 dB or more") {
  const double fs = 5e6;
  const int K = 5000;
  const double tau = 222e-6;
  auto p = make_params(27, 1.3, tau, 800.0, 1.9);
  const auto buf = synthesize_signal(p, 0.05, fs);
  const auto coarse = acquire_strongest(buf, 27);
  const auto refined = refine_acquisition(buf, coarse);
  const auto ext = extract_phase_and_bits(buf, refined, 0.05);

  RecoveryEstimate est;
  est.prn_id = 27;
  est.amplitude = estimate_amplitude(refined.peak_metric, K);
  est.code_delay = refined.code_delay;
  est.doppler = refined.doppler + ext.doppler_correction;
  est.carrier_phase = ext.carrier_phase;
  est.nav_bits = ext.nav_bits;
  est.period_bits = ext.period_bits;
  const auto residual = cancel(buf, est);
  (void)residual;
  CHECK(est.residual_metric <= 1e-4 * refined.peak_metric);
}

TEST_CASE("a 10% amplitude overestimate leaves the analytic 20 dB residue") {
  const double fs = 5e6;
  const int K = 5000;
  const double tau = 540e-6;
  auto p = make_params(12, 1.0, tau, 0.0, 0.7);
  const auto buf = synthesize_signal(p, 0.05, fs);

  AcqPeak exact;
  exact.prn_id = 12;
  exact.code_delay = tau;
  exact.doppler = 0.0;
  exact.peak_metric = caf_value_at(buf, generate_ca_code(12), 0.0, tau, 4);
  const auto ext = extract_phase_and_bits(buf, exact, 0.05);

  RecoveryEstimate est;
  est.prn_id = 12;
  est.amplitude = 1.1;  // deliberate overestimate of a=1
  est.code_delay = tau;
  est.doppler = 0.0;
  est.carrier_phase = ext.carrier_phase;
  est.nav_bits = ext.nav_bits;
  est.period_bits = ext.period_bits;
  const auto residual_buf = cancel(buf, est);

  // residual peak ~ (0.1 a K)^2, checked against the independent
  // time-domain correlation of the residual buffer
  const auto oracle = testing::direct_caf(residual_buf, generate_ca_code(12), {0.0}, 4);
  double peak = 0.0;
  const int cell = static_cast<int>(std::lround(tau * fs));
  for (int d = -2; d <= 2; ++d) {
    peak = std::max(peak, oracle.values[0][static_cast<std::size_t>(cell + d)]);
  }
  const double expected = std::pow(0.1 * K, 2.0);
  CHECK(peak == doctest::Approx(expected).epsilon(0.15));
  CHECK(est.residual_metric == doctest::Approx(expected).epsilon(0.15));
  CHECK(power_db(exact.peak_metric / est.residual_metric) == doctest::Approx(20.0).epsilon(0.04));
}

TEST_CASE("first-iteration attenuation reaches 10 dB at +3 dB advantage") {
  const double fs = 5e6;
  int passes = 0;
  const int seeds = 5;
  for (int s = 0; s < seeds; ++s) {
    std::mt19937_64 rng(derive_seed(7000, static_cast<std::uint64_t>(s)));
    std::uniform_real_distribution<double> ud(100e-6, 900e-6);
    std::uniform_real_distribution<double> uf(-3000.0, 3000.0);
    std::uniform_real_distribution<double> up(0.0, kTwoPi);
    const double tau = ud(rng);
    const double f = uf(rng);
    auto legit = make_params(25, 1.0, tau, f, up(rng));
    auto attacker = make_params(25, db_to_linear_amplitude(3.0), tau + 1.5e-6, f, up(rng));
    auto buf = add_buffers(synthesize_signal(legit, 0.06, fs),
                           synthesize_signal(attacker, 0.06, fs));
    testing::add_noise(buf, 125.0, derive_seed(7100, static_cast<std::uint64_t>(s)));

    AcqConfig cfg;
    const auto grid = compute_caf(buf, generate_ca_code(25), cfg.doppler_bins());
    const auto verdict = detect_spoofing(find_peaks(grid, 4, cfg), cfg);
    REQUIRE(verdict.spoofing);

    auto [residual, report] = recover(buf, verdict, 0, 1);
    REQUIRE(!report.per_iteration.empty());
    if (report.per_iteration.front().accepted &&
        report.per_iteration.front().attenuation_db >= 10.0) {
      ++passes;
    }
  }
  CHECK(passes == seeds);
}

TEST_CASE("recovery succeeds against a +3 dB attacker and preserves the ToA") {
  const double fs = 5e6;
  const double tau = 350e-6;
  const double f = 1100.0;
  auto legit = make_params(30, 1.0, tau, f, 0.9);
  auto attacker = make_params(30, db_to_linear_amplitude(3.0), tau + 1.3e-6, f, 2.2);
  auto clean = synthesize_signal(legit, 0.08, fs);
  testing::add_noise(clean, 125.0, 31337);
  auto buf = add_buffers(synthesize_signal(legit, 0.08, fs),
                         synthesize_signal(attacker, 0.08, fs));
  testing::add_noise(buf, 125.0, 31337);

  AcqConfig cfg;
  const auto verdict = detect_spoofing(
      find_peaks(compute_caf(buf, generate_ca_code(30), cfg.doppler_bins()), 4, cfg), cfg);
  REQUIRE(verdict.spoofing);
  REQUIRE(verdict.peaks.size() >= 2);
  // the attacker is the stronger peak here; the identifier would say so
  const std::size_t adv_index = 0;

  auto [residual, report] = recover(buf, verdict, adv_index, 5);
  REQUIRE(report.success);
  CHECK(report.iterations <= 5);

  // accepted iterations never increase the adversarial peak
  for (const auto& it : report.per_iteration) {
    if (it.accepted) CHECK(it.post_smax <= it.pre_smax);
  }

  // ToA preservation: the recovered legitimate delay matches an
  // attacker-free oracle run within one sample
  const auto oracle_peak = refine_acquisition(clean, acquire_strongest(clean, 30), cfg);
  const double err = std::abs(
      wrap_centered(report.recovered_peak.code_delay - oracle_peak.code_delay, kCodePeriod));
  CHECK(err < 1.0 / fs);
}

TEST_CASE("a +15 dB attacker needs multi-stage attenuation to expose the peak") {
  const double fs = 5e6;
  const double tau = 620e-6;
  const double f = -900.0;
  auto legit = make_params(22, 1.0, tau, f, 0.4);
  auto attacker = make_params(22, db_to_linear_amplitude(15.0), tau + 2.2e-6, f, 5.1);
  auto buf = add_buffers(synthesize_signal(legit, 0.08, fs),
                         synthesize_signal(attacker, 0.08, fs));
  testing::add_noise(buf, 125.0, 999);

  AcqConfig cfg;
  const auto verdict = detect_spoofing(
      find_peaks(compute_caf(buf, generate_ca_code(22), cfg.doppler_bins()), 4, cfg), cfg);
  REQUIRE(verdict.spoofing);

  auto [residual, report] = recover(buf, verdict, 0, 8);
  CHECK(report.success);
  const double err = std::abs(
      wrap_centered(report.recovered_peak.code_delay - tau, kCodePeriod));
  CHECK(err < 2.0 / fs);
}

TEST_CASE("self-cancellation of a clean signal fails with empty residual peaks") {
  const double fs = 5e6;
  auto p = make_params(18, 1.0, 450e-6, 600.0, 1.0);
  auto buf = synthesize_signal(p, 0.06, fs);
  testing::add_noise(buf, 125.0, 4242);

  AcqConfig cfg;
  const auto peaks = find_peaks(compute_caf(buf, generate_ca_code(18), cfg.doppler_bins()), 4,
                                cfg);
  REQUIRE(peaks.size() == 1);
  const auto verdict = detect_spoofing(peaks, cfg);
  CHECK_FALSE(verdict.spoofing);

  // force the clean peak through the cancellation path anyway
  auto [residual, report] = recover(buf, verdict, 0, 3);
  CHECK_FALSE(report.success);
  CHECK(report.final_verdict.peaks.empty());
  CHECK(report.failure_reason.find("no residual peaks") != std::string::npos);
}

TEST_CASE("refined estimates cancel better than coarse estimates") {
  const double fs = 5e6;
  const int K = 5000;
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> ud(100e-6, 900e-6);
  std::uniform_real_distribution<double> uf(-3000.0, 3000.0);
  std::uniform_real_distribution<double> up(0.0, kTwoPi);
  for (int trial = 0; trial < 3; ++trial) {
    auto p = make_params(10, 1.0, ud(rng), uf(rng), up(rng));
    const auto buf = synthesize_signal(p, 0.05, fs);
    const auto coarse = acquire_strongest(buf, 10);
    const auto refined = refine_acquisition(buf, coarse);

    auto run_cancel = [&](const AcqPeak& peak) {
      const auto ext = extract_phase_and_bits(buf, peak, 0.05);
      RecoveryEstimate est;
      est.prn_id = 10;
      est.amplitude = estimate_amplitude(peak.peak_metric, K);
      est.code_delay = peak.code_delay;
      est.doppler = peak.doppler + ext.doppler_correction;
      est.carrier_phase = ext.carrier_phase;
      est.nav_bits = ext.nav_bits;
      est.period_bits = ext.period_bits;
      cancel(buf, est);
      return est.residual_metric;
    };
    CAPTURE(trial);
    CHECK(run_cancel(refined) <= run_cancel(coarse));
  }
}
