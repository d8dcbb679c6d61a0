#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sicrx {

// GPS L1 C/A constants
constexpr double kChipRate = 1.023e6;        // chips/s
constexpr int kCodeLength = 1023;            // chips per period
constexpr double kCodePeriod = 1e-3;         // s
constexpr double kCarrierFreq = 1575.42e6;   // Hz
constexpr double kCodeCarrierRatio = kCarrierFreq / kChipRate;  // 1540
constexpr double kBitRate = 50.0;            // nav bits/s
constexpr double kBitPeriod = 1.0 / kBitRate;
constexpr int kPeriodsPerBit = 20;
constexpr double kSpeedOfLight = 299792458.0;  // m/s
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kTwoPi = 2.0 * kPi;

using cfloat = std::complex<float>;
using cdouble = std::complex<double>;

// Complex baseband sample stream. The universal currency between modules.
struct IqBuffer {
  std::vector<cfloat> samples;
  double sample_rate = 0.0;  // Sa/s
  double start_time = 0.0;   // s, receiver timeline of samples[0]

  std::size_t size() const { return samples.size(); }
  double duration() const {
    return sample_rate > 0.0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

// Copy out [t0, t0 + dur) as a standalone buffer (clamped to the source).
IqBuffer slice(const IqBuffer& in, double t0, double dur);

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrackingFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverError : std::runtime_error {
  SolverError(const std::string& msg, double cond) : std::runtime_error(msg), condition(cond) {}
  double condition = 0.0;
};

struct InsufficientSatellites : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PartialRectification : std::runtime_error {
  PartialRectification(const std::string& msg, std::vector<int> prns)
      : std::runtime_error(msg), missing_prns(std::move(prns)) {}
  std::vector<int> missing_prns;
};

struct UnsupportedZone : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double wrap_two_pi(double phase) {
  phase = std::fmod(phase, kTwoPi);
  return phase < 0.0 ? phase + kTwoPi : phase;
}

// Wrap to (-half, +half]; used for circular code-delay differences.
inline double wrap_centered(double value, double period) {
  double v = std::fmod(value, period);
  if (v > 0.5 * period) v -= period;
  if (v <= -0.5 * period) v += period;
  return v;
}

inline double db_to_linear_amplitude(double db) { return std::pow(10.0, db / 20.0); }
inline double db_to_linear_power(double db) { return std::pow(10.0, db / 10.0); }
inline double power_db(double ratio) { return 10.0 * std::log10(ratio); }

// Derive an independent 64-bit stream seed from a base seed and stream id
// (splitmix64 step), so parallel trials stay reproducible under any schedule.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace sicrx
