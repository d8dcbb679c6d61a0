#include "sicrx/signal.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "sicrx/acquisition.hpp"

using namespace sicrx;

namespace {

SatelliteSignalParams make_params(int prn, double a, double delay, double doppler, double phase) {
  SatelliteSignalParams p{prn, a, delay, doppler, phase, NavMessage(prn, {2.0e7, 1.0e7, 8.0e6})};
  return p;
}

}  // namespace

TEST_CASE("first sample with all modulation terms unity is chip0 x bit0") {
  auto p = make_params(1, 1.0, 0.0, 0.0, 0.0);
  const auto buf = synthesize_signal(p, 2e-3, 10e6);
  const auto code = generate_ca_code(1);
  const double expected = code.chip(0) * p.nav.bit(0);
  CHECK(buf.samples[0].real() == doctest::Approx(expected).epsilon(1e-9));
  CHECK(buf.samples[0].imag() == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("zero amplitude gives an all-zero buffer") {
  auto p = make_params(4, 0.0, 3e-4, 1200.0, 1.0);
  const auto buf = synthesize_signal(p, 2e-3, 5e6);
  for (const auto& s : buf.samples) {
    CHECK(s.real() == 0.0f);
    CHECK(s.imag() == 0.0f);
  }
}

TEST_CASE("samples follow the code/bit/carrier reference expression") {
  auto p = make_params(9, 1.5, 0.0, 0.0, 0.0);
  const double fs = 4e6;
  const auto buf = synthesize_signal(p, 25e-3, fs);
  const auto code = generate_ca_code(9);
  for (std::size_t k = 0; k < buf.samples.size(); k += 997) {
    const double t = static_cast<double>(k) / fs;
    const int chip = code.chip(static_cast<int>(std::floor(t * kChipRate)));
    const int bit = p.nav.bit(static_cast<long long>(std::floor(t * kBitRate)));
    CHECK(buf.samples[k].real() == doctest::Approx(1.5 * chip * bit).epsilon(1e-6));
  }
}

TEST_CASE("mean squared magnitude equals amplitude squared") {
  for (double a : {0.5, 1.0, 2.0}) {
    auto p = make_params(13, a, 410e-6, -2250.0, 2.7);
    const auto buf = synthesize_signal(p, 10e-3, 5e6);
    double acc = 0.0;
    for (const auto& s : buf.samples) acc += std::norm(s);
    acc /= static_cast<double>(buf.samples.size());
    CHECK(acc == doctest::Approx(a * a).epsilon(0.01));
  }
}

TEST_CASE("buffer repeats every code period at zero doppler") {
  auto p = make_params(21, 1.0, 650e-6, 0.0, 0.4);
  const double fs = 5e6;
  const auto buf = synthesize_signal(p, 5e-3, fs);
  const auto K = static_cast<std::size_t>(fs * kCodePeriod);
  // all samples fall within one nav bit, so periods repeat exactly
  for (std::size_t k = 0; k < K; k += 37) {
    CHECK(buf.samples[k] == buf.samples[k + K]);
    CHECK(buf.samples[k] == buf.samples[k + 3 * K]);
  }
}

TEST_CASE("precondition violations are rejected") {
  auto p = make_params(2, 1.0, 0.0, 0.0, 0.0);
  CHECK_THROWS_AS(synthesize_signal(p, 2e-3, 1.5e6), std::invalid_argument);
  CHECK_THROWS_AS(synthesize_signal(p, 0.5e-3, 10e6), std::invalid_argument);
  auto bad = make_params(2, -1.0, 0.0, 0.0, 0.0);
  CHECK_THROWS_AS(synthesize_signal(bad, 2e-3, 10e6), std::invalid_argument);
  auto fast = make_params(2, 1.0, 0.0, 12e3, 0.0);
  CHECK_THROWS_AS(synthesize_signal(fast, 2e-3, 10e6), std::invalid_argument);
}

TEST_CASE("acquiring a synthesized buffer recovers delay, doppler and amplitude") {
  // bit edge in the window placed between equal bits so the coherent sums
  // stay clean; acquisition sees code delay 250 us
  auto p = make_params(5, 2.0, 250e-6 + 98.0 / kBitRate, 1500.0, 0.9);
  const double fs = 10e6;
  const auto buf = synthesize_signal(p, 5e-3, fs);

  AcqConfig cfg;
  const auto grid = compute_caf(buf, generate_ca_code(5), cfg.doppler_bins());
  const auto peaks = find_peaks(grid, 2, cfg);
  REQUIRE(peaks.size() == 1);
  CHECK(std::abs(peaks[0].code_delay - 250e-6) < 1.0 / fs);
  CHECK(std::abs(peaks[0].doppler - 1500.0) <= cfg.doppler_step / 2.0 + 1e-9);
  CHECK(peaks[0].estimated_amplitude == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("round trip: random noiseless params land within one grid cell") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> delay(0.0, kCodePeriod);
  std::uniform_real_distribution<double> doppler(-4500.0, 4500.0);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  const double fs = 5e6;
  AcqConfig cfg;
  const auto bins = cfg.doppler_bins();

  for (int trial = 0; trial < 5; ++trial) {
    auto p = make_params(1 + static_cast<int>(rng() % 32), 1.0, delay(rng), doppler(rng),
                         phase(rng));
    const auto buf = synthesize_signal(p, 6e-3, fs);
    const auto grid = compute_caf(buf, generate_ca_code(p.prn_id), bins);
    const auto peaks = find_peaks(grid, 2, cfg);
    CAPTURE(trial);
    REQUIRE(peaks.size() >= 1);
    const double derr = std::abs(wrap_centered(peaks[0].code_delay - p.code_delay(), kCodePeriod));
    CHECK(derr < 1.0 / fs);
    CHECK(std::abs(peaks[0].doppler - p.doppler) <= cfg.doppler_step / 2.0 + 1e-9);
  }
}
