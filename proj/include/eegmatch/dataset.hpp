#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace eegmatch {

struct SubjectEntry {
  int id = 0;
};

struct StimulusEntry {
  std::string id;
  std::map<std::string, std::string> features;  // feature name -> MMTS path
  std::string words;                            // optional words JSON
  std::string audio;                            // optional WAV
};

struct RecordingEntry {
  int subject_id = 0;
  std::string stimulus_id;
  std::string eeg;  // MMTS path; also the recording's series id
};

// Paths inside entries are relative to `root` unless absolute.
struct DatasetManifest {
  std::filesystem::path root;
  std::vector<SubjectEntry> subjects;
  std::vector<StimulusEntry> stimuli;
  std::vector<RecordingEntry> recordings;

  const StimulusEntry& stimulus(const std::string& id) const;
  std::filesystem::path resolve(const std::string& path) const;
};

inline constexpr const char* kManifestFile = "manifest.json";

// Accepts the manifest JSON itself or the directory holding manifest.json.
DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& json_path);

// Rejects dangling subject/stimulus references and duplicate ids. With
// `check_files`, also requires every referenced file to exist and the
// features of each stimulus to agree on sample count.
void validate_manifest(const DatasetManifest& manifest, bool check_files = true);

struct SynthSpec {
  std::size_t n_subjects = 6;
  std::size_t n_stimuli = 4;
  double duration_s = 600.0;
  std::size_t eeg_channels = 64;
  std::size_t feature_channels = 8;
  std::size_t mixing_kernel_len = 16;
  // Noise standard deviation relative to the clean EEG RMS. Infinity yields
  // pure unit-variance noise with no stimulus content.
  double noise_sigma = 0.1;
  std::uint64_t seed = 0;
  double feature_cutoff_hz = 8.0;
  // Per-subject spatial map = shared map + jitter * Gaussian.
  double subject_jitter = 0.3;
  std::size_t word_embedding_width = 16;
  bool write_words = true;
};

// Feature name used for the synthetic stimulus features.
inline constexpr const char* kSynthFeature = "synth";

// Writes stimuli/, eeg/ and manifest.json under `out_dir`. Subject s hears
// stimulus ((s - 1) mod n_stimuli) + 1 once.
DatasetManifest generate_synthetic(const SynthSpec& spec, const std::filesystem::path& out_dir);

}  // namespace eegmatch
