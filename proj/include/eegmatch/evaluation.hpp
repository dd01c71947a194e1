#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "eegmatch/data.hpp"
#include "eegmatch/model.hpp"
#include "eegmatch/series.hpp"

namespace eegmatch {

// One EEG segment with its matched speech segment hidden among mismatched
// segments of the same stimulus.
struct CandidateSet {
  SegmentRef eeg_segment;
  std::vector<SegmentRef> candidates;
  std::size_t matched_index = 0;
};

// For every segment of every prepared recording, `sets_per_segment` sets of
// 1 matched + `n_negatives` mismatched candidates in a seeded random order.
std::vector<CandidateSet> build_candidate_sets(const PreparedData& data, std::size_t n_negatives,
                                               std::size_t sets_per_segment, std::uint64_t seed);

struct Prediction {
  std::size_t index = 0;
  std::vector<double> scores;
};

// Index of the largest score; ties go to the lowest index.
std::size_t argmax_first(std::span<const double> scores);

// score_i = mean over latent dimensions of Pearson(eeg_d, candidate_i_d).
Prediction predict_match(const TimeSeries& eeg_latent, std::span<const TimeSeries> candidate_latents);

// Encodes segments without recording a tape, `batch` series at a time.
std::vector<TimeSeries> encode_eeg_segments(const MatchModel& model, const PreparedData& data,
                                            std::span<const SegmentRef> segments, std::size_t batch = 32);
std::vector<TimeSeries> encode_feature_segments(const MatchModel& model, const PreparedData& data,
                                                std::span<const SegmentRef> segments, std::size_t batch = 256);

// Throws ConfigMismatch when the model's input widths differ from the data's.
void check_compatible(const MatchModel& model, const PreparedData& data);

Prediction predict_match(const MatchModel& model, const PreparedData& data, const CandidateSet& set);
std::vector<Prediction> predict_sets(const MatchModel& model, const PreparedData& data,
                                     std::span<const CandidateSet> sets);

double accuracy(std::span<const Prediction> predictions, std::span<const CandidateSet> sets);
double accuracy(const MatchModel& model, const PreparedData& data, std::span<const CandidateSet> sets);

// Plurality over per-model predicted indices; ties go to the largest summed
// score across the tied indices, then to the lowest index.
std::size_t ensemble_vote(std::span<const Prediction> per_model);

// Per-set votes for models that may each need differently prepared data.
// `data[m]` must hold the inputs for `models[m]`.
std::vector<Prediction> ensemble_predict(std::span<const MatchModel* const> models,
                                         std::span<const PreparedData* const> data,
                                         std::span<const CandidateSet> sets);

}  // namespace eegmatch
