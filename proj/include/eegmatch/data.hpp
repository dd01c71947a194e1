#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "eegmatch/autodiff.hpp"
#include "eegmatch/config.hpp"
#include "eegmatch/dataset.hpp"
#include "eegmatch/series.hpp"

namespace eegmatch {

struct PreparedRecording {
  std::string series_id;  // the manifest EEG path
  std::size_t manifest_index = 0;
  int subject_id = 0;
  std::string stimulus_id;
  TimeSeries eeg;
  std::size_t n_segments = 0;  // segments covered by both EEG and features
};

struct PreparedStimulus {
  std::string id;
  TimeSeries features;  // fused in ModelConfig::features order
  std::size_t n_segments = 0;
};

// Model-ready signals for a subset of recordings: filter bank applied, features
// fused, standardized per the model config.
struct PreparedData {
  std::size_t segment_samples = 0;
  Standardization standardize = Standardization::Recording;
  std::vector<PreparedRecording> recordings;
  std::map<std::string, PreparedStimulus> stimuli;

  std::size_t eeg_channels() const;
  std::size_t feature_channels() const;
  const PreparedRecording& recording(const std::string& series_id) const;
  const PreparedStimulus& stimulus(const std::string& id) const;
  std::vector<SegmentRef> stimulus_segments(const std::string& id) const;
};

PreparedData prepare_data(const DatasetManifest& manifest, const ModelConfig& model, double segment_seconds,
                          std::span<const std::size_t> recording_indices);

struct SegmentSource {
  const TimeSeries* series = nullptr;
  std::size_t start = 0;
};

// Stacks equal-length slices into a [C, N, T] tensor, z-scoring each slice
// when `standardize` is Segment.
ad::Tensor stack_segments(std::span<const SegmentSource> sources, std::size_t length, Standardization standardize);

}  // namespace eegmatch
