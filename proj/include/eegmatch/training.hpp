#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "eegmatch/autodiff.hpp"
#include "eegmatch/config.hpp"
#include "eegmatch/data.hpp"
#include "eegmatch/dataset.hpp"
#include "eegmatch/evaluation.hpp"
#include "eegmatch/model.hpp"

namespace eegmatch {

// ---------------------------------------------------------------------------
// Cross-validation splits

struct FoldSpec {
  std::size_t fold_id = 0;
  std::set<int> validation_subject_ids;
  std::vector<std::size_t> training_recordings;    // manifest indices
  std::vector<std::size_t> validation_recordings;  // after exclusion
  // Recordings of validation subjects dropped because training heard their stimulus.
  std::vector<std::size_t> excluded_validation_recordings;
};

// "1-26", "3", "1-4,9" -> subject ids.
std::set<int> parse_subject_ranges(const std::string& text);

// Validation = recordings of the listed subjects whose stimulus no training
// recording uses; training = every other subject's recordings.
std::vector<FoldSpec> make_folds(const DatasetManifest& manifest, std::span<const std::string> fold_defs);

// ---------------------------------------------------------------------------
// Negatives and loss

// n segments of the matched one's stimulus, never the matched segment itself;
// without replacement when enough others exist, else with replacement.
std::vector<SegmentRef> sample_negatives(std::span<const SegmentRef> stimulus_segments, const SegmentRef& matched,
                                         std::size_t n, std::mt19937_64& rng);

enum class DegeneratePolicy {
  Throw,           // DegenerateChannel on a zero-variance latent dimension
  ZeroSimilarity,  // treat its similarity as 0 and pass no gradient through it
};

// Candidate rows per example, indexing the second axis of the candidate latents.
struct ContrastiveBatch {
  std::vector<std::vector<std::size_t>> candidates;
  std::vector<std::size_t> matched;  // position inside candidates[b]
};

// Mean over the batch of
//   -sum_d log( exp(r(eeg_d, cand_p_d)) / sum_i exp(r(eeg_d, cand_i_d)) )
// with r the Pearson correlation over time. eeg_latent is [D, B, T] and
// candidate_latent is [D, U, T]. `degenerate_count`, when given, receives the
// number of similarities replaced under ZeroSimilarity.
ad::Tensor infonce_loss(ad::Tape& tape, const ad::Tensor& eeg_latent, const ad::Tensor& candidate_latent,
                        const ContrastiveBatch& batch, DegeneratePolicy policy = DegeneratePolicy::Throw,
                        std::size_t* degenerate_count = nullptr);

// Single example: eeg_latent [D, T], candidates [D, N + 1, T].
ad::Tensor infonce_loss(ad::Tape& tape, const ad::Tensor& eeg_latent, const ad::Tensor& candidates,
                        std::size_t matched_index, DegeneratePolicy policy = DegeneratePolicy::Throw);

// D * log(1 + N e^-2): the loss when the matched similarity is 1 and all others -1.
double infonce_lower_bound(std::size_t d_latent, std::size_t n_negatives);

// ---------------------------------------------------------------------------
// Optimizer

struct AdamConfig {
  double lr = 2e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

AdamState make_adam_state(const ad::ParameterList& params, const AdamConfig& config);

// Bias-corrected Adam update of every parameter from its accumulated gradient.
// Throws MissingGradient if a parameter has none.
void adam_step(AdamState& state, ad::ParameterList& params);

// ---------------------------------------------------------------------------
// Training loop

// Stops once `patience` consecutive evaluations fail to beat the best
// accuracy; equal accuracy is not an improvement, so ties keep the earlier one.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  // Returns true when `accuracy` is a new best.
  bool update(double accuracy);
  bool should_stop() const noexcept { return since_best_ >= patience_; }
  std::size_t evaluations() const noexcept { return evaluations_; }
  std::size_t best_evaluation() const noexcept { return best_evaluation_; }  // 1-based, 0 before any
  double best_accuracy() const noexcept { return best_; }

 private:
  std::size_t patience_;
  std::size_t evaluations_ = 0;
  std::size_t best_evaluation_ = 0;
  std::size_t since_best_ = 0;
  double best_ = 0.0;
};

struct TraceRow {
  std::size_t step = 0;
  double loss = 0.0;  // mean training loss since the previous evaluation
  double val_accuracy = 0.0;
};

std::string trace_csv(std::span<const TraceRow> rows);
void write_trace_csv(const std::filesystem::path& path, std::span<const TraceRow> rows);

struct TrainResult {
  ModelCheckpoint best;
  std::vector<TraceRow> trace;
  std::size_t steps = 0;
  bool stopped_early = false;
  std::size_t degenerate_similarities = 0;
};

struct TrainHooks {
  // Replaces the validation accuracy computation when set.
  std::function<double(const MatchModel&, std::size_t step)> evaluate;
  std::function<void(const TraceRow&)> on_evaluation;
};

// One training run: Adam on the mean InfoNCE loss of random batches, with
// validation accuracy every eval_every_steps and early stopping. Returns the
// checkpoint with the best validation accuracy.
TrainResult train_loop(const RunConfig& config, const PreparedData& train, const PreparedData& validation,
                       std::span<const CandidateSet> validation_sets, const TrainHooks& hooks = {});

struct FoldData {
  FoldSpec fold;
  PreparedData train;
  PreparedData validation;
  std::vector<CandidateSet> validation_sets;
};

// Splits the manifest with config.folds[config.fold] and prepares both sides.
// Throws EmptyValidation when exclusion leaves nothing to validate on.
FoldData prepare_fold(const RunConfig& config, const DatasetManifest& manifest);

TrainResult train_fold(const RunConfig& config, const DatasetManifest& manifest, const TrainHooks& hooks = {});

}  // namespace eegmatch
