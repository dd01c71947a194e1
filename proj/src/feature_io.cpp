#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "eegmatch/error.hpp"
#include "eegmatch/features.hpp"
#include "eegmatch/mmts.hpp"

namespace eegmatch {

using nlohmann::json;

std::filesystem::path words_matrix_path(const std::filesystem::path& json_path) {
  auto p = json_path;
  p.replace_extension(".mmts");
  return p;
}

std::vector<WordToken> read_words(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + json_path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::FormatError, json_path.string() + ": " + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorKind::FormatError, json_path.string() + ": expected a JSON array");

  std::vector<WordToken> words;
  if (doc.empty()) return words;
  const auto matrix = read_mmts(words_matrix_path(json_path));
  for (const auto& entry : doc) {
    WordToken w;
    try {
      w.text = entry.at("text").get<std::string>();
      w.onset_s = entry.at("onset_s").get<double>();
      w.offset_s = entry.at("offset_s").get<double>();
      const auto row = entry.at("embedding_row").get<std::size_t>();
      if (row >= matrix.samples()) {
        throw Error(ErrorKind::FormatError, "word '" + w.text + "' references missing embedding row " + std::to_string(row));
      }
      w.embedding.resize(matrix.channels());
      for (std::size_t c = 0; c < matrix.channels(); ++c) w.embedding[c] = matrix(c, row);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::FormatError, json_path.string() + ": " + e.what());
    }
    words.push_back(std::move(w));
  }
  return words;
}

void write_words(const std::filesystem::path& json_path, std::span<const WordToken> words) {
  json doc = json::array();
  for (std::size_t i = 0; i < words.size(); ++i) {
    doc.push_back({{"text", words[i].text}, {"onset_s", words[i].onset_s}, {"offset_s", words[i].offset_s}, {"embedding_row", i}});
  }
  std::ofstream out(json_path);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + json_path.string() + " for writing");
  out << doc.dump(2) << '\n';
  if (words.empty()) return;
  const std::size_t width = words.front().embedding.size();
  TimeSeries matrix(width, words.size(), 1.0);
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i].embedding.size() != width) throw Error(ErrorKind::WidthMismatch, "ragged word embeddings");
    for (std::size_t c = 0; c < width; ++c) matrix(c, i) = words[i].embedding[c];
  }
  write_mmts(words_matrix_path(json_path), matrix);
}

namespace {

template <typename T>
T read_le(const std::vector<char>& buf, std::size_t pos) {
  if (pos + sizeof(T) > buf.size()) throw Error(ErrorKind::FormatError, "truncated WAV");
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  return v;
}

template <typename T>
void write_le(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

TimeSeries read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 || std::memcmp(buf.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorKind::FormatError, path.string() + ": not a RIFF/WAVE file");
  }
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const std::string id(buf.data() + pos, 4);
    const auto size = read_le<std::uint32_t>(buf, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      format = read_le<std::uint16_t>(buf, body);
      channels = read_le<std::uint16_t>(buf, body + 2);
      rate = read_le<std::uint32_t>(buf, body + 4);
      bits = read_le<std::uint16_t>(buf, body + 14);
    } else if (id == "data") {
      if (channels != 1) throw Error(ErrorKind::FormatError, path.string() + ": only mono WAV is supported");
      const std::size_t len = std::min<std::size_t>(size, buf.size() - body);
      std::vector<double> samples;
      if (format == 1 && bits == 16) {
        for (std::size_t i = 0; i + 2 <= len; i += 2) samples.push_back(read_le<std::int16_t>(buf, body + i) / 32768.0);
      } else if (format == 3 && bits == 32) {
        for (std::size_t i = 0; i + 4 <= len; i += 4) samples.push_back(read_le<float>(buf, body + i));
      } else {
        throw Error(ErrorKind::FormatError, path.string() + ": unsupported WAV encoding");
      }
      return TimeSeries(1, static_cast<double>(rate), std::move(samples));
    }
    pos = body + size + (size % 2);
  }
  throw Error(ErrorKind::FormatError, path.string() + ": no data chunk");
}

void write_wav(const std::filesystem::path& path, const TimeSeries& audio, bool as_float) {
  if (audio.channels() != 1) throw Error(ErrorKind::InvalidArgument, "only mono WAV is supported");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  const std::uint16_t bits = as_float ? 32 : 16;
  const auto data_bytes = static_cast<std::uint32_t>(audio.samples() * bits / 8);
  const auto rate = static_cast<std::uint32_t>(std::lround(audio.sample_rate_hz()));
  out.write("RIFF", 4);
  write_le<std::uint32_t>(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  write_le<std::uint32_t>(out, 16);
  write_le<std::uint16_t>(out, as_float ? 3 : 1);
  write_le<std::uint16_t>(out, 1);
  write_le<std::uint32_t>(out, rate);
  write_le<std::uint32_t>(out, rate * bits / 8);
  write_le<std::uint16_t>(out, bits / 8);
  write_le<std::uint16_t>(out, bits);
  out.write("data", 4);
  write_le<std::uint32_t>(out, data_bytes);
  for (double v : audio.data()) {
    if (as_float) {
      write_le<float>(out, static_cast<float>(v));
    } else {
      write_le<std::int16_t>(out, static_cast<std::int16_t>(std::lround(std::clamp(v, -1.0, 32767.0 / 32768.0) * 32768.0)));
    }
  }
}

}  // namespace eegmatch
