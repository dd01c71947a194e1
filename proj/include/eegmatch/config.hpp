#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "eegmatch/encoders.hpp"
#include "eegmatch/filters.hpp"

namespace eegmatch {

enum class Standardization { Recording, Segment };

struct TrainConfig {
  double lr = 2e-5;
  std::size_t batch_size = 32;
  std::size_t n_negatives = 32;
  std::size_t eval_every_steps = 1000;
  std::size_t patience_evals = 20;
  std::size_t n_val_negatives = 4;
  double segment_seconds = 5.0;
  std::uint64_t seed = 0;
  std::size_t max_steps = 200000;
  std::size_t val_sets_per_segment = 1;

  void validate() const;
};

// Everything needed to rebuild a model's inputs from a manifest.
struct ModelConfig {
  EegEncoderConfig eeg;             // in_channels is filled from the data
  std::vector<BandSpec> bands;      // empty: broadband EEG
  std::vector<std::string> features = {"env"};
  Standardization standardize = Standardization::Recording;
};

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  // Validation subject ranges, one per fold, e.g. "1-26" or "3,5-7".
  std::vector<std::string> folds = {"1-26", "18-34", "35-51", "52-68", "69-85"};
  std::size_t fold = 0;
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const RunConfig& cfg, const std::filesystem::path& path);

// Sets a dotted key ("train.lr", "model.features") to `value`, parsed as JSON
// when possible and as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& key, const std::string& value);

}  // namespace eegmatch
