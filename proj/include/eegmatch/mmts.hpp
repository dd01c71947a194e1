#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "eegmatch/series.hpp"

namespace eegmatch {

// Binary layout, little-endian:
//   "MMTS" | u16 version (1) | u32 channels | f64 sample_rate | u64 samples |
//   f32 payload, channel-major.
inline constexpr char kMmtsMagic[4] = {'M', 'M', 'T', 'S'};
inline constexpr std::uint16_t kMmtsVersion = 1;

void write_mmts(std::ostream& out, const TimeSeries& ts);
TimeSeries read_mmts(std::istream& in);

void write_mmts(const std::filesystem::path& path, const TimeSeries& ts);
TimeSeries read_mmts(const std::filesystem::path& path);

}  // namespace eegmatch
