#include "eegmatch/dataset.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <random>
#include <set>

#include "eegmatch/error.hpp"
#include "eegmatch/features.hpp"
#include "eegmatch/filters.hpp"
#include "eegmatch/mmts.hpp"

namespace eegmatch {

using nlohmann::json;

const StimulusEntry& DatasetManifest::stimulus(const std::string& id) const {
  for (const auto& s : stimuli) {
    if (s.id == id) return s;
  }
  throw Error(ErrorKind::InvalidManifest, "unknown stimulus '" + id + "'");
}

std::filesystem::path DatasetManifest::resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  return p.is_absolute() ? p : root / p;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  const auto file = std::filesystem::is_directory(path) ? path / kManifestFile : path;
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::IoError, "cannot open manifest " + file.string());
  DatasetManifest m;
  m.root = file.parent_path();
  try {
    const json doc = json::parse(in);
    for (const auto& s : doc.at("subjects")) m.subjects.push_back({s.at("id").get<int>()});
    for (const auto& s : doc.at("stimuli")) {
      StimulusEntry e;
      e.id = s.at("id").get<std::string>();
      if (s.contains("features")) e.features = s.at("features").get<std::map<std::string, std::string>>();
      e.words = s.value("words", "");
      e.audio = s.value("audio", "");
      m.stimuli.push_back(std::move(e));
    }
    for (const auto& r : doc.at("recordings")) {
      m.recordings.push_back(
          {r.at("subject_id").get<int>(), r.at("stimulus_id").get<std::string>(), r.at("eeg").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidManifest, file.string() + ": " + e.what());
  }
  return m;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& json_path) {
  json doc;
  doc["subjects"] = json::array();
  for (const auto& s : manifest.subjects) doc["subjects"].push_back({{"id", s.id}});
  doc["stimuli"] = json::array();
  for (const auto& s : manifest.stimuli) {
    json e = {{"id", s.id}, {"features", s.features}};
    if (!s.words.empty()) e["words"] = s.words;
    if (!s.audio.empty()) e["audio"] = s.audio;
    doc["stimuli"].push_back(std::move(e));
  }
  doc["recordings"] = json::array();
  for (const auto& r : manifest.recordings) {
    doc["recordings"].push_back({{"subject_id", r.subject_id}, {"stimulus_id", r.stimulus_id}, {"eeg", r.eeg}});
  }
  std::ofstream out(json_path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write manifest " + json_path.string());
  out << doc.dump(2) << '\n';
}

namespace {

std::uint64_t mmts_samples(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  char header[26];
  in.read(header, sizeof header);
  if (!in || std::string(header, 4) != "MMTS") throw Error(ErrorKind::FormatError, p.string() + ": not an MMTS file");
  std::uint64_t samples;
  std::memcpy(&samples, header + 18, sizeof samples);
  return samples;
}

}  // namespace

void validate_manifest(const DatasetManifest& manifest, bool check_files) {
  std::set<int> subjects;
  for (const auto& s : manifest.subjects) {
    if (!subjects.insert(s.id).second) throw Error(ErrorKind::InvalidManifest, "duplicate subject id " + std::to_string(s.id));
  }
  std::set<std::string> stimuli;
  for (const auto& s : manifest.stimuli) {
    if (!stimuli.insert(s.id).second) throw Error(ErrorKind::InvalidManifest, "duplicate stimulus id '" + s.id + "'");
  }
  for (std::size_t i = 0; i < manifest.recordings.size(); ++i) {
    const auto& r = manifest.recordings[i];
    const std::string where = "recording " + std::to_string(i) + " (" + r.eeg + ")";
    if (!subjects.contains(r.subject_id)) {
      throw Error(ErrorKind::InvalidManifest, where + " references unknown subject " + std::to_string(r.subject_id));
    }
    if (!stimuli.contains(r.stimulus_id)) {
      throw Error(ErrorKind::InvalidManifest, where + " references unknown stimulus '" + r.stimulus_id + "'");
    }
    if (check_files && !std::filesystem::exists(manifest.resolve(r.eeg))) {
      throw Error(ErrorKind::InvalidManifest, where + " EEG file does not exist");
    }
  }
  if (!check_files) return;
  for (const auto& s : manifest.stimuli) {
    std::uint64_t samples = 0;
    for (const auto& [name, path] : s.features) {
      const auto p = manifest.resolve(path);
      if (!std::filesystem::exists(p)) {
        throw Error(ErrorKind::InvalidManifest, "stimulus '" + s.id + "' feature '" + name + "' file does not exist");
      }
      const auto n = mmts_samples(p);
      if (samples != 0 && n != samples) {
        throw Error(ErrorKind::InvalidManifest, "stimulus '" + s.id + "' feature '" + name + "' has " +
                                                    std::to_string(n) + " samples, expected " + std::to_string(samples));
      }
      samples = n;
    }
    for (const auto* opt : {&s.words, &s.audio}) {
      if (!opt->empty() && !std::filesystem::exists(manifest.resolve(*opt))) {
        throw Error(ErrorKind::InvalidManifest, "stimulus '" + s.id + "' references missing file " + *opt);
      }
    }
  }
}

DatasetManifest generate_synthetic(const SynthSpec& spec, const std::filesystem::path& out_dir) {
  if (spec.n_subjects == 0 || spec.n_stimuli == 0 || spec.eeg_channels == 0 || spec.feature_channels == 0 ||
      spec.mixing_kernel_len == 0 || !(spec.duration_s > 0.0) || !(spec.noise_sigma >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "invalid synthetic dataset spec");
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "stimuli", ec);
  std::filesystem::create_directories(out_dir / "eeg", ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + out_dir.string() + ": " + ec.message());

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double fs = kFeatureRateHz;
  const auto samples = static_cast<std::size_t>(std::llround(spec.duration_s * fs));
  const std::size_t cf = spec.feature_channels;
  const std::size_t ce = spec.eeg_channels;
  const std::size_t klen = spec.mixing_kernel_len;

  // Shared response kernels (one per feature channel, decaying) and spatial map.
  std::vector<std::vector<double>> kernels(cf, std::vector<double>(klen));
  for (auto& k : kernels) {
    double norm = 0.0;
    for (std::size_t t = 0; t < klen; ++t) {
      k[t] = normal(rng) * std::exp(-static_cast<double>(t) / (static_cast<double>(klen) / 3.0));
      norm += k[t] * k[t];
    }
    for (auto& v : k) v /= std::sqrt(norm);
  }
  std::vector<double> base_map(ce * cf);
  for (auto& v : base_map) v = normal(rng);

  DatasetManifest m;
  m.root = out_dir;
  const auto smoother = design_band({0.0, spec.feature_cutoff_hz, 4}, fs);
  std::vector<TimeSeries> driven;  // features after the response kernels
  for (std::size_t s = 0; s < spec.n_stimuli; ++s) {
    const std::string id = "stim" + std::to_string(s + 1);
    TimeSeries noise(cf, samples, fs);
    for (double& v : noise.data()) v = normal(rng);
    const TimeSeries features = zscore_standardize(filtfilt(smoother, noise));

    StimulusEntry entry{id, {{kSynthFeature, "stimuli/" + id + "_" + kSynthFeature + ".mmts"}}, "", ""};
    write_mmts(out_dir / entry.features.at(kSynthFeature), features);

    TimeSeries conv(cf, samples, fs);
    for (std::size_t c = 0; c < cf; ++c) {
      const auto x = features.channel(c);
      auto y = conv.channel(c);
      for (std::size_t t = 0; t < samples; ++t) {
        double acc = 0.0;
        for (std::size_t k = 0; k < klen && k <= t; ++k) acc += kernels[c][k] * x[t - k];
        y[t] = acc;
      }
    }
    driven.push_back(std::move(conv));

    if (spec.write_words && spec.word_embedding_width > 0) {
      std::vector<WordToken> words;
      std::uniform_real_distribution<double> gap(0.05, 0.3), length(0.15, 0.6);
      double t = gap(rng);
      while (true) {
        const double len = length(rng);
        if (t + len > spec.duration_s) break;
        WordToken w{"w" + std::to_string(words.size()), t, t + len, std::vector<double>(spec.word_embedding_width)};
        for (auto& v : w.embedding) v = normal(rng);
        words.push_back(std::move(w));
        t += len + gap(rng);
      }
      entry.words = "stimuli/" + id + "_words.json";
      write_words(out_dir / entry.words, words);
    }
    m.stimuli.push_back(std::move(entry));
  }

  for (std::size_t subj = 1; subj <= spec.n_subjects; ++subj) {
    m.subjects.push_back({static_cast<int>(subj)});
    std::vector<double> map = base_map;
    for (auto& v : map) v += spec.subject_jitter * normal(rng);
    const std::size_t s = (subj - 1) % spec.n_stimuli;
    const auto& src = driven[s];

    TimeSeries eeg(ce, samples, fs);
    const bool pure_noise = std::isinf(spec.noise_sigma);
    if (!pure_noise) {
      for (std::size_t e = 0; e < ce; ++e) {
        auto y = eeg.channel(e);
        for (std::size_t c = 0; c < cf; ++c) {
          const double a = map[e * cf + c];
          const auto x = src.channel(c);
          for (std::size_t t = 0; t < samples; ++t) y[t] += a * x[t];
        }
      }
    }
    double rms = 1.0;
    if (!pure_noise) {
      double ss = 0.0;
      for (double v : eeg.data()) ss += v * v;
      rms = std::sqrt(ss / static_cast<double>(eeg.data().size()));
    }
    const double sigma = pure_noise ? 1.0 : spec.noise_sigma * rms;
    for (double& v : eeg.data()) v += sigma * normal(rng);

    char name[64];
    std::snprintf(name, sizeof name, "eeg/sub-%03zu_%s.mmts", subj, m.stimuli[s].id.c_str());
    write_mmts(out_dir / name, eeg);
    m.recordings.push_back({static_cast<int>(subj), m.stimuli[s].id, name});
  }
  save_manifest(m, out_dir / kManifestFile);
  return m;
}

}  // namespace eegmatch
