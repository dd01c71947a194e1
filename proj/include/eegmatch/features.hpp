#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "eegmatch/series.hpp"

namespace eegmatch {

inline constexpr double kFeatureRateHz = 64.0;

struct WordToken {
  std::string text;
  double onset_s = 0.0;
  double offset_s = 0.0;
  std::vector<double> embedding;
};

// Top-k principal directions of mean-centred rows.
struct PcaModel {
  Eigen::VectorXd mean;                // input width
  Eigen::MatrixXd components;          // k x width, orthonormal rows
  Eigen::VectorXd explained_variance;  // k, nonincreasing

  std::size_t input_width() const noexcept { return static_cast<std::size_t>(mean.size()); }
  std::size_t output_width() const noexcept { return static_cast<std::size_t>(components.rows()); }
};

// Feature name ("env", "mel", "wav2vec", "gpt", ...) to its 64 Hz series.
using FeatureSet = std::map<std::string, TimeSeries>;

struct MelConfig {
  std::size_t n_mel = 28;
  double window_s = 0.025;
  double frame_rate_hz = kFeatureRateHz;
  double log_floor = 1e-10;
};

// Full-wave rectification, zero-phase low-pass, then resampling to `target_hz`.
TimeSeries envelope(const TimeSeries& audio, double lowpass_hz = 20.0, double target_hz = kFeatureRateHz);

// Log mel band energies. Frame j is centred on sample round(j * fs / frame_rate).
TimeSeries mel_spectrogram(const TimeSeries& audio, const MelConfig& config = {});

// HTK mel scale.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Each word's embedding fills samples [round(onset * rate), round(offset * rate));
// gaps stay zero and a later word overwrites an earlier one where they overlap.
TimeSeries continuous_word_embedding(std::span<const WordToken> words, double duration_s, std::size_t width,
                                     double rate_hz = kFeatureRateHz);

PcaModel pca_fit(const Eigen::MatrixXd& rows, std::size_t k);
Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& rows);
Eigen::MatrixXd pca_reconstruct(const PcaModel& model, const Eigen::MatrixXd& codes);

// Applies a fitted PCA sample-wise: channels are the input width.
TimeSeries pca_transform(const PcaModel& model, const TimeSeries& ts);

// Samples-by-channels matrix view of a series, the layout PCA expects.
Eigen::MatrixXd to_rows(const TimeSeries& ts);

// Channel concatenation in the order of `names`.
TimeSeries fuse_features(const FeatureSet& set, std::span<const std::string> names);

// Words JSON: [{"text", "onset_s", "offset_s", "embedding_row"}], with raw
// embeddings in a sibling MMTS file of the same stem (channels = width,
// samples = rows).
std::vector<WordToken> read_words(const std::filesystem::path& json_path);
void write_words(const std::filesystem::path& json_path, std::span<const WordToken> words);
std::filesystem::path words_matrix_path(const std::filesystem::path& json_path);

// Mono 16-bit PCM or 32-bit float WAV.
TimeSeries read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const TimeSeries& audio, bool as_float = false);

}  // namespace eegmatch
