#include "eegmatch/mmts.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "eegmatch/error.hpp"

namespace eegmatch {

static_assert(std::endian::native == std::endian::little, "MMTS I/O assumes a little-endian host");

namespace {

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error(ErrorKind::FormatError, "truncated MMTS header");
  return value;
}

}  // namespace

void write_mmts(std::ostream& out, const TimeSeries& ts) {
  out.write(kMmtsMagic, 4);
  put<std::uint16_t>(out, kMmtsVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ts.channels()));
  put<double>(out, ts.sample_rate_hz());
  put<std::uint64_t>(out, ts.samples());
  std::vector<float> payload(ts.data().begin(), ts.data().end());
  out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size() * sizeof(float)));
  if (!out) throw Error(ErrorKind::IoError, "failed writing MMTS payload");
}

TimeSeries read_mmts(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMmtsMagic, 4) != 0) throw Error(ErrorKind::FormatError, "bad MMTS magic");
  const auto version = get<std::uint16_t>(in);
  if (version != kMmtsVersion) {
    throw Error(ErrorKind::FormatError, "unsupported MMTS version " + std::to_string(version));
  }
  const auto channels = get<std::uint32_t>(in);
  const auto rate = get<double>(in);
  const auto samples = get<std::uint64_t>(in);
  if (channels == 0 || samples == 0) throw Error(ErrorKind::FormatError, "MMTS with empty shape");
  std::vector<float> payload(static_cast<std::size_t>(channels) * samples);
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size() * sizeof(float)));
  if (!in) throw Error(ErrorKind::FormatError, "truncated MMTS payload");
  return TimeSeries(channels, rate, std::vector<double>(payload.begin(), payload.end()));
}

void write_mmts(const std::filesystem::path& path, const TimeSeries& ts) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  write_mmts(out, ts);
}

TimeSeries read_mmts(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  try {
    return read_mmts(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace eegmatch
