#include "sicrx/iq_io.hpp"

#include <array>
#include <cstring>
#include <fstream>

namespace sicrx {

namespace {
constexpr char kMagic[4] = {'S', 'F', 'I', 'Q'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_iq(const IqBuffer& buffer, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("save_iq: cannot open " + path);

  std::array<char, 16> header{};
  std::memcpy(header.data(), kMagic, 4);
  std::uint32_t version = kVersion;
  std::memcpy(header.data() + 4, &version, 4);
  std::uint64_t rate = static_cast<std::uint64_t>(buffer.sample_rate);
  std::memcpy(header.data() + 8, &rate, 8);
  f.write(header.data(), header.size());

  // complex<float> is layout-compatible with float[2] = {I, Q}
  f.write(reinterpret_cast<const char*>(buffer.samples.data()),
          static_cast<std::streamsize>(buffer.samples.size() * sizeof(cfloat)));
  if (!f) throw FormatError("save_iq: write failed for " + path);
}

IqBuffer load_iq(const std::string& path) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) throw FormatError("load_iq: cannot open " + path);
  const auto file_size = static_cast<std::uint64_t>(f.tellg());
  f.seekg(0);

  if (file_size < 16) throw FormatError("load_iq: file shorter than header: " + path);
  std::array<char, 16> header{};
  f.read(header.data(), header.size());
  if (std::memcmp(header.data(), kMagic, 4) != 0) {
    throw FormatError("load_iq: bad magic in " + path);
  }
  std::uint32_t version = 0;
  std::memcpy(&version, header.data() + 4, 4);
  if (version != kVersion) {
    throw FormatError("load_iq: unsupported version " + std::to_string(version));
  }
  std::uint64_t rate = 0;
  std::memcpy(&rate, header.data() + 8, 8);
  if (rate == 0) throw FormatError("load_iq: zero sample_rate in header");

  const std::uint64_t payload = file_size - 16;
  if (payload % sizeof(cfloat) != 0) {
    throw FormatError("load_iq: truncated sample payload in " + path);
  }

  IqBuffer out;
  out.sample_rate = static_cast<double>(rate);
  out.start_time = 0.0;
  out.samples.resize(payload / sizeof(cfloat));
  f.read(reinterpret_cast<char*>(out.samples.data()), static_cast<std::streamsize>(payload));
  if (!f) throw FormatError("load_iq: read failed for " + path);
  return out;
}

}  // namespace sicrx
