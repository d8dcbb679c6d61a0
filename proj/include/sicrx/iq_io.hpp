#pragma once

#include <string>

#include "sicrx/common.hpp"

namespace sicrx {

// IQ file format: 16-byte header (magic "SFIQ", version u32 LE,
// sample_rate u64 LE) followed by interleaved 32-bit LE floats (I, Q).
// start_time is not persisted; load_iq restores it as 0.
void save_iq(const IqBuffer& buffer, const std::string& path);
IqBuffer load_iq(const std::string& path);

}  // namespace sicrx
