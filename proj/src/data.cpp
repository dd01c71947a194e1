#include "eegmatch/data.hpp"

#include <algorithm>

#include "eegmatch/error.hpp"
#include "eegmatch/features.hpp"
#include "eegmatch/filters.hpp"
#include "eegmatch/mmts.hpp"

namespace eegmatch {

std::size_t PreparedData::eeg_channels() const {
  if (recordings.empty()) throw Error(ErrorKind::EmptyInput, "no prepared recordings");
  return recordings.front().eeg.channels();
}

std::size_t PreparedData::feature_channels() const {
  if (stimuli.empty()) throw Error(ErrorKind::EmptyInput, "no prepared stimuli");
  return stimuli.begin()->second.features.channels();
}

const PreparedRecording& PreparedData::recording(const std::string& series_id) const {
  for (const auto& r : recordings) {
    if (r.series_id == series_id) return r;
  }
  throw Error(ErrorKind::InvalidArgument, "recording '" + series_id + "' was not prepared");
}

const PreparedStimulus& PreparedData::stimulus(const std::string& id) const {
  const auto it = stimuli.find(id);
  if (it == stimuli.end()) throw Error(ErrorKind::InvalidArgument, "stimulus '" + id + "' was not prepared");
  return it->second;
}

std::vector<SegmentRef> PreparedData::stimulus_segments(const std::string& id) const {
  const auto& s = stimulus(id);
  std::vector<SegmentRef> out;
  for (std::size_t i = 0; i < s.n_segments; ++i) out.push_back({id, i * segment_samples, segment_samples});
  return out;
}

PreparedData prepare_data(const DatasetManifest& manifest, const ModelConfig& model, double segment_seconds,
                          std::span<const std::size_t> recording_indices) {
  PreparedData data;
  data.standardize = model.standardize;
  const bool whole = model.standardize == Standardization::Recording;

  for (const auto idx : recording_indices) {
    if (idx >= manifest.recordings.size()) throw Error(ErrorKind::InvalidArgument, "recording index out of range");
    const auto& entry = manifest.recordings[idx];
    if (!data.stimuli.contains(entry.stimulus_id)) {
      const auto& stim = manifest.stimulus(entry.stimulus_id);
      FeatureSet set;
      for (const auto& name : model.features) {
        const auto it = stim.features.find(name);
        if (it == stim.features.end()) {
          throw Error(ErrorKind::MissingFeature, "stimulus '" + stim.id + "' has no feature '" + name + "'");
        }
        set.emplace(name, read_mmts(manifest.resolve(it->second)));
      }
      auto fused = fuse_features(set, model.features);
      PreparedStimulus p{stim.id, whole ? zscore_standardize(fused) : std::move(fused), 0};
      data.stimuli.emplace(stim.id, std::move(p));
    }
    auto& stim = data.stimuli.at(entry.stimulus_id);

    TimeSeries eeg = read_mmts(manifest.resolve(entry.eeg));
    if (eeg.sample_rate_hz() != stim.features.sample_rate_hz()) {
      throw Error(ErrorKind::ConfigMismatch, entry.eeg + " is sampled at " + std::to_string(eeg.sample_rate_hz()) +
                                                 " Hz but its features at " + std::to_string(stim.features.sample_rate_hz()) + " Hz");
    }
    if (!model.bands.empty()) eeg = multiband_eeg(eeg, model.bands);
    if (whole) eeg = zscore_standardize(eeg);

    if (data.segment_samples == 0) data.segment_samples = segment_length(segment_seconds, eeg.sample_rate_hz());
    stim.n_segments = stim.features.samples() / data.segment_samples;
    const std::size_t usable = std::min(eeg.samples(), stim.features.samples());
    PreparedRecording rec{entry.eeg, idx, entry.subject_id, entry.stimulus_id, std::move(eeg), usable / data.segment_samples};
    if (rec.n_segments == 0) throw Error(ErrorKind::EmptyInput, entry.eeg + " is shorter than one segment");
    if (!data.recordings.empty() && rec.eeg.channels() != data.recordings.front().eeg.channels()) {
      throw Error(ErrorKind::ConfigMismatch, entry.eeg + " has a different channel count");
    }
    data.recordings.push_back(std::move(rec));
  }
  return data;
}

ad::Tensor stack_segments(std::span<const SegmentSource> sources, std::size_t length, Standardization standardize) {
  if (sources.empty()) throw Error(ErrorKind::EmptyInput, "no segments to stack");
  const std::size_t c_count = sources.front().series->channels();
  const std::size_t n = sources.size();
  std::vector<double> values(c_count * n * length);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& src = sources[i];
    if (src.series->channels() != c_count) throw Error(ErrorKind::ShapeMismatch, "segments differ in channel count");
    if (src.start + length > src.series->samples()) throw Error(ErrorKind::InvalidArgument, "segment exceeds its series");
    if (standardize == Standardization::Segment) {
      const TimeSeries seg = zscore_standardize(src.series->slice(src.start, length));
      for (std::size_t c = 0; c < c_count; ++c) {
        std::copy(seg.channel(c).begin(), seg.channel(c).end(), values.begin() + static_cast<std::ptrdiff_t>((c * n + i) * length));
      }
    } else {
      for (std::size_t c = 0; c < c_count; ++c) {
        const auto ch = src.series->channel(c).subspan(src.start, length);
        std::copy(ch.begin(), ch.end(), values.begin() + static_cast<std::ptrdiff_t>((c * n + i) * length));
      }
    }
  }
  return ad::Tensor({c_count, n, length}, std::move(values));
}

}  // namespace eegmatch
