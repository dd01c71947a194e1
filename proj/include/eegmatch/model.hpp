#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "eegmatch/autodiff.hpp"
#include "eegmatch/config.hpp"
#include "eegmatch/encoders.hpp"

namespace eegmatch {

// The EEG encoder and the feature encoder that share one latent space.
class MatchModel {
 public:
  MatchModel(const ModelConfig& cfg, std::size_t eeg_channels, std::size_t feature_channels, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return cfg_; }
  std::size_t eeg_channels() const noexcept { return eeg_.config().in_channels; }
  std::size_t feature_channels() const noexcept { return features_.config().in_channels; }
  std::size_t d_latent() const noexcept { return eeg_.config().d_latent; }

  const EegEncoder& eeg() const noexcept { return eeg_; }
  const FeatureEncoder& features() const noexcept { return features_; }

  // Handles sharing storage with the encoders' parameters.
  ad::ParameterList parameters() const;

 private:
  ModelConfig cfg_;
  EegEncoder eeg_;
  FeatureEncoder features_;
};

struct NamedArray {
  std::string name;
  ad::Shape shape;
  std::vector<double> values;
};

struct ModelCheckpoint {
  RunConfig config;
  std::size_t eeg_channels = 0;
  std::size_t feature_channels = 0;
  std::vector<NamedArray> parameters;
  double best_val_accuracy = 0.0;
  std::size_t best_step = 0;
};

ModelCheckpoint make_checkpoint(const MatchModel& model, const RunConfig& config, double best_val_accuracy,
                                std::size_t best_step);
MatchModel restore_model(const ModelCheckpoint& checkpoint);

// "MMCK" | u16 version | u64 header bytes | JSON header | f64 payloads in header order.
void save_checkpoint(const ModelCheckpoint& checkpoint, const std::filesystem::path& path);
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace eegmatch
