#include "eegmatch/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "eegmatch/error.hpp"
#include "eegmatch/training.hpp"

namespace eegmatch {

std::vector<CandidateSet> build_candidate_sets(const PreparedData& data, std::size_t n_negatives,
                                               std::size_t sets_per_segment, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0xc0ffee1234567ULL);
  const std::size_t len = data.segment_samples;
  std::map<std::string, std::vector<SegmentRef>> segments;
  std::vector<CandidateSet> sets;
  for (const auto& rec : data.recordings) {
    auto it = segments.find(rec.stimulus_id);
    if (it == segments.end()) it = segments.emplace(rec.stimulus_id, data.stimulus_segments(rec.stimulus_id)).first;
    for (std::size_t j = 0; j < rec.n_segments; ++j) {
      const SegmentRef matched{rec.stimulus_id, j * len, len};
      for (std::size_t k = 0; k < sets_per_segment; ++k) {
        CandidateSet set;
        set.eeg_segment = {rec.series_id, j * len, len};
        set.candidates = sample_negatives(it->second, matched, n_negatives, rng);
        std::uniform_int_distribution<std::size_t> pos(0, n_negatives);
        set.matched_index = pos(rng);
        set.candidates.insert(set.candidates.begin() + static_cast<std::ptrdiff_t>(set.matched_index), matched);
        sets.push_back(std::move(set));
      }
    }
  }
  return sets;
}

std::size_t argmax_first(std::span<const double> scores) {
  if (scores.empty()) throw Error(ErrorKind::EmptyInput, "no scores");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

namespace {

// Rows centred and scaled to unit norm.
std::vector<double> unit_rows(const TimeSeries& ts) {
  std::vector<double> out(ts.data().begin(), ts.data().end());
  const std::size_t n = ts.samples();
  const double threshold = kDegenerateEpsilon * std::sqrt(static_cast<double>(n > 1 ? n - 1 : 1));
  for (std::size_t c = 0; c < ts.channels(); ++c) {
    double* row = out.data() + c * n;
    const double mean = std::accumulate(row, row + n, 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      row[t] -= mean;
      ss += row[t] * row[t];
    }
    const double norm = std::sqrt(ss);
    if (norm <= threshold) {
      throw Error(ErrorKind::DegenerateChannel, "latent dimension " + std::to_string(c) + " has zero variance");
    }
    for (std::size_t t = 0; t < n; ++t) row[t] /= norm;
  }
  return out;
}

double mean_correlation(const std::vector<double>& a, const std::vector<double>& b, std::size_t dims,
                        std::size_t length) {
  double total = 0.0;
  for (std::size_t d = 0; d < dims; ++d) {
    double acc = 0.0;
    const double* x = a.data() + d * length;
    const double* y = b.data() + d * length;
    for (std::size_t t = 0; t < length; ++t) acc += x[t] * y[t];
    total += std::clamp(acc, -1.0, 1.0);
  }
  return total / static_cast<double>(dims);
}

std::vector<TimeSeries> split_latent(const ad::Tensor& z, double rate) {
  const std::size_t d = z.dim(0), n = z.dim(1), t = z.dim(2);
  const auto v = z.values();
  std::vector<TimeSeries> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> data(d * t);
    for (std::size_t k = 0; k < d; ++k) {
      std::copy_n(v.begin() + static_cast<std::ptrdiff_t>((k * n + i) * t), t, data.begin() + static_cast<std::ptrdiff_t>(k * t));
    }
    out.emplace_back(d, rate, std::move(data));
  }
  return out;
}

template <typename Lookup, typename Encode>
std::vector<TimeSeries> encode_in_batches(std::span<const SegmentRef> segments, std::size_t batch,
                                          const PreparedData& data, Lookup lookup, Encode encode) {
  if (batch == 0) throw Error(ErrorKind::InvalidArgument, "batch size must be positive");
  std::vector<TimeSeries> out;
  out.reserve(segments.size());
  for (std::size_t first = 0; first < segments.size(); first += batch) {
    const std::size_t last = std::min(segments.size(), first + batch);
    std::vector<SegmentSource> sources;
    const std::size_t len = segments[first].length_samples;
    double rate = 1.0;
    for (std::size_t i = first; i < last; ++i) {
      const TimeSeries& series = lookup(segments[i].series_id);
      if (segments[i].length_samples != len || segments[i].end_sample() > series.samples()) {
        throw Error(ErrorKind::InvalidArgument, "segment of '" + segments[i].series_id + "' is out of range");
      }
      rate = series.sample_rate_hz();
      sources.push_back({&series, segments[i].start_sample});
    }
    ad::Tape tape(false);
    const auto z = encode(tape, stack_segments(sources, len, data.standardize));
    for (auto& ts : split_latent(z, rate)) out.push_back(std::move(ts));
  }
  return out;
}

using SegmentKey = std::pair<std::string, std::size_t>;

SegmentKey key_of(const SegmentRef& s) { return {s.series_id, s.start_sample}; }

}  // namespace

Prediction predict_match(const TimeSeries& eeg_latent, std::span<const TimeSeries> candidate_latents) {
  if (candidate_latents.empty()) throw Error(ErrorKind::EmptyInput, "no candidates");
  const auto x = unit_rows(eeg_latent);
  Prediction p;
  for (const auto& c : candidate_latents) {
    if (c.channels() != eeg_latent.channels() || c.samples() != eeg_latent.samples()) {
      throw Error(ErrorKind::ShapeMismatch, "candidate latent shape differs from the EEG latent");
    }
    p.scores.push_back(mean_correlation(x, unit_rows(c), c.channels(), c.samples()));
  }
  p.index = argmax_first(p.scores);
  return p;
}

std::vector<TimeSeries> encode_eeg_segments(const MatchModel& model, const PreparedData& data,
                                            std::span<const SegmentRef> segments, std::size_t batch) {
  ad::DropoutSource unused;
  return encode_in_batches(
      segments, batch, data, [&](const std::string& id) -> const TimeSeries& { return data.recording(id).eeg; },
      [&](ad::Tape& tape, const ad::Tensor& x) { return model.eeg().forward(tape, x, false, unused); });
}

std::vector<TimeSeries> encode_feature_segments(const MatchModel& model, const PreparedData& data,
                                                std::span<const SegmentRef> segments, std::size_t batch) {
  return encode_in_batches(
      segments, batch, data,
      [&](const std::string& id) -> const TimeSeries& { return data.stimulus(id).features; },
      [&](ad::Tape& tape, const ad::Tensor& f) { return model.features().forward(tape, f); });
}

void check_compatible(const MatchModel& model, const PreparedData& data) {
  if (model.eeg_channels() != data.eeg_channels() || model.feature_channels() != data.feature_channels()) {
    throw Error(ErrorKind::ConfigMismatch,
                "model expects " + std::to_string(model.eeg_channels()) + " EEG and " +
                    std::to_string(model.feature_channels()) + " feature channels, data has " +
                    std::to_string(data.eeg_channels()) + " and " + std::to_string(data.feature_channels()));
  }
}

Prediction predict_match(const MatchModel& model, const PreparedData& data, const CandidateSet& set) {
  return predict_sets(model, data, std::span<const CandidateSet>(&set, 1)).front();
}

std::vector<Prediction> predict_sets(const MatchModel& model, const PreparedData& data,
                                     std::span<const CandidateSet> sets) {
  check_compatible(model, data);
  std::map<SegmentKey, std::size_t> eeg_index, feat_index;
  std::vector<SegmentRef> eeg_segments, feat_segments;
  for (const auto& set : sets) {
    if (set.candidates.empty() || set.matched_index >= set.candidates.size()) {
      throw Error(ErrorKind::InvalidArgument, "malformed candidate set");
    }
    if (eeg_index.try_emplace(key_of(set.eeg_segment), eeg_segments.size()).second) {
      eeg_segments.push_back(set.eeg_segment);
    }
    for (const auto& c : set.candidates) {
      if (feat_index.try_emplace(key_of(c), feat_segments.size()).second) feat_segments.push_back(c);
    }
  }
  std::vector<std::vector<double>> eeg_units, feat_units;
  for (const auto& z : encode_eeg_segments(model, data, eeg_segments)) eeg_units.push_back(unit_rows(z));
  for (const auto& z : encode_feature_segments(model, data, feat_segments)) feat_units.push_back(unit_rows(z));

  const std::size_t dims = model.d_latent();
  const std::size_t len = data.segment_samples;
  std::vector<Prediction> out;
  out.reserve(sets.size());
  for (const auto& set : sets) {
    const auto& x = eeg_units[eeg_index.at(key_of(set.eeg_segment))];
    Prediction p;
    for (const auto& c : set.candidates) {
      p.scores.push_back(mean_correlation(x, feat_units[feat_index.at(key_of(c))], dims, len));
    }
    p.index = argmax_first(p.scores);
    out.push_back(std::move(p));
  }
  return out;
}

double accuracy(std::span<const Prediction> predictions, std::span<const CandidateSet> sets) {
  if (predictions.size() != sets.size()) throw Error(ErrorKind::LengthMismatch, "predictions and sets differ in count");
  if (sets.empty()) throw Error(ErrorKind::EmptyValidation, "no candidate sets");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < sets.size(); ++i) hits += predictions[i].index == sets[i].matched_index ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(sets.size());
}

double accuracy(const MatchModel& model, const PreparedData& data, std::span<const CandidateSet> sets) {
  const auto predictions = predict_sets(model, data, sets);
  return accuracy(predictions, sets);
}

std::size_t ensemble_vote(std::span<const Prediction> per_model) {
  if (per_model.empty()) throw Error(ErrorKind::EmptyInput, "no predictions to vote on");
  const std::size_t n = per_model.front().scores.size();
  std::vector<std::size_t> votes(n, 0);
  std::vector<double> summed(n, 0.0);
  for (const auto& p : per_model) {
    if (p.scores.size() != n || p.index >= n) throw Error(ErrorKind::ShapeMismatch, "predictions disagree in size");
    ++votes[p.index];
    for (std::size_t i = 0; i < n; ++i) summed[i] += p.scores[i];
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (votes[i] > votes[best] || (votes[i] == votes[best] && summed[i] > summed[best])) best = i;
  }
  return best;
}

std::vector<Prediction> ensemble_predict(std::span<const MatchModel* const> models,
                                         std::span<const PreparedData* const> data,
                                         std::span<const CandidateSet> sets) {
  if (models.empty()) throw Error(ErrorKind::EmptyInput, "ensemble has no models");
  if (models.size() != data.size()) throw Error(ErrorKind::LengthMismatch, "one prepared dataset per model is needed");
  std::vector<std::vector<Prediction>> per_model;
  for (std::size_t m = 0; m < models.size(); ++m) per_model.push_back(predict_sets(*models[m], *data[m], sets));

  std::vector<Prediction> out(sets.size());
  std::vector<Prediction> column(models.size());
  for (std::size_t s = 0; s < sets.size(); ++s) {
    for (std::size_t m = 0; m < models.size(); ++m) column[m] = per_model[m][s];
    out[s].index = ensemble_vote(column);
    out[s].scores.assign(sets[s].candidates.size(), 0.0);
    for (const auto& p : column) {
      for (std::size_t i = 0; i < p.scores.size(); ++i) out[s].scores[i] += p.scores[i];
    }
  }
  return out;
}

}  // namespace eegmatch
