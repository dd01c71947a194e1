#include "eegmatch/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include "eegmatch/error.hpp"

namespace eegmatch {

std::set<int> parse_subject_ranges(const std::string& text) {
  std::set<int> ids;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto dash = part.find('-', 1);
    try {
      std::size_t used = 0;
      if (dash == std::string::npos) {
        ids.insert(std::stoi(part, &used));
        if (used != part.size()) throw std::invalid_argument(part);
      } else {
        const int lo = std::stoi(part.substr(0, dash));
        const int hi = std::stoi(part.substr(dash + 1));
        if (hi < lo) throw std::invalid_argument(part);
        for (int i = lo; i <= hi; ++i) ids.insert(i);
      }
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::InvalidArgument, "bad subject range '" + part + "' in '" + text + "'");
    }
  }
  if (ids.empty()) throw Error(ErrorKind::InvalidArgument, "empty subject range '" + text + "'");
  return ids;
}

std::vector<FoldSpec> make_folds(const DatasetManifest& manifest, std::span<const std::string> fold_defs) {
  std::set<int> known;
  for (const auto& s : manifest.subjects) known.insert(s.id);

  std::vector<FoldSpec> folds;
  for (std::size_t f = 0; f < fold_defs.size(); ++f) {
    FoldSpec fold;
    fold.fold_id = f;
    fold.validation_subject_ids = parse_subject_ranges(fold_defs[f]);
    for (int id : fold.validation_subject_ids) {
      if (!known.contains(id)) {
        throw Error(ErrorKind::UnknownSubject, "fold " + std::to_string(f) + " lists subject " + std::to_string(id) +
                                                   " which the manifest does not contain");
      }
    }
    std::set<std::string> training_stimuli;
    for (std::size_t r = 0; r < manifest.recordings.size(); ++r) {
      const auto& rec = manifest.recordings[r];
      if (!fold.validation_subject_ids.contains(rec.subject_id)) {
        fold.training_recordings.push_back(r);
        training_stimuli.insert(rec.stimulus_id);
      }
    }
    for (std::size_t r = 0; r < manifest.recordings.size(); ++r) {
      const auto& rec = manifest.recordings[r];
      if (!fold.validation_subject_ids.contains(rec.subject_id)) continue;
      if (training_stimuli.contains(rec.stimulus_id)) {
        fold.excluded_validation_recordings.push_back(r);
      } else {
        fold.validation_recordings.push_back(r);
      }
    }
    folds.push_back(std::move(fold));
  }
  return folds;
}

std::vector<SegmentRef> sample_negatives(std::span<const SegmentRef> stimulus_segments, const SegmentRef& matched,
                                         std::size_t n, std::mt19937_64& rng) {
  std::vector<const SegmentRef*> others;
  for (const auto& s : stimulus_segments) {
    if (!(s == matched)) others.push_back(&s);
  }
  if (others.empty()) {
    throw Error(ErrorKind::NoNegativesAvailable, "stimulus '" + matched.series_id + "' has no other segment");
  }
  std::vector<SegmentRef> out;
  out.reserve(n);
  if (others.size() >= n) {
    for (std::size_t i = 0; i < n; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, others.size() - 1);
      std::swap(others[i], others[pick(rng)]);
      out.push_back(*others[i]);
    }
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, others.size() - 1);
    for (std::size_t i = 0; i < n; ++i) out.push_back(*others[pick(rng)]);
  }
  return out;
}

namespace {

struct SeriesBlock {
  std::size_t dims;
  std::size_t series;
  std::size_t length;
};

SeriesBlock latent_layout(const ad::Tensor& t, const char* what) {
  if (t.rank() == 2) return {t.dim(0), 1, t.dim(1)};
  if (t.rank() == 3) return {t.dim(0), t.dim(1), t.dim(2)};
  throw Error(ErrorKind::ShapeMismatch, std::string(what) + " latent must be [D, T] or [D, N, T]");
}

// Centred rows scaled to unit norm; norms[r] is the centred norm, 0 if degenerate.
void normalise_rows(std::span<const double> values, std::size_t rows, std::size_t length, std::vector<double>& unit,
                    std::vector<double>& norms) {
  unit.assign(values.begin(), values.end());
  norms.assign(rows, 0.0);
  const double threshold = kDegenerateEpsilon * std::sqrt(static_cast<double>(length - 1));
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = unit.data() + r * length;
    const double mean = std::accumulate(row, row + length, 0.0) / static_cast<double>(length);
    double ss = 0.0;
    for (std::size_t t = 0; t < length; ++t) {
      row[t] -= mean;
      ss += row[t] * row[t];
    }
    const double norm = std::sqrt(ss);
    if (norm <= threshold) {
      std::fill(row, row + length, 0.0);
      continue;
    }
    norms[r] = norm;
    for (std::size_t t = 0; t < length; ++t) row[t] /= norm;
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

ad::Tensor infonce_loss(ad::Tape& tape, const ad::Tensor& eeg_latent, const ad::Tensor& candidate_latent,
                        const ContrastiveBatch& batch, DegeneratePolicy policy, std::size_t* degenerate_count) {
  const auto e = latent_layout(eeg_latent, "EEG");
  const auto c = latent_layout(candidate_latent, "candidate");
  if (e.dims != c.dims || e.length != c.length) {
    throw Error(ErrorKind::ShapeMismatch, "EEG latent " + ad::shape_string(eeg_latent.shape()) +
                                              " and candidate latent " + ad::shape_string(candidate_latent.shape()) +
                                              " differ in dimension or length");
  }
  if (e.length < 2) throw Error(ErrorKind::ShapeMismatch, "latent series need at least two samples");
  if (batch.candidates.size() != e.series || batch.matched.size() != e.series) {
    throw Error(ErrorKind::ShapeMismatch, "contrastive batch size does not match the EEG latent");
  }
  for (std::size_t b = 0; b < e.series; ++b) {
    if (batch.candidates[b].empty() || batch.matched[b] >= batch.candidates[b].size()) {
      throw Error(ErrorKind::InvalidArgument, "matched index out of range");
    }
    for (auto u : batch.candidates[b]) {
      if (u >= c.series) throw Error(ErrorKind::InvalidArgument, "candidate index out of range");
    }
  }

  const std::size_t d_count = e.dims, len = e.length;
  // Row (d, n) of a [D, N, T] tensor starts at (d * N + n) * T.
  auto ex = std::make_shared<std::vector<double>>();
  auto cx = std::make_shared<std::vector<double>>();
  auto en = std::make_shared<std::vector<double>>();
  auto cn = std::make_shared<std::vector<double>>();
  normalise_rows(eeg_latent.values(), d_count * e.series, len, *ex, *en);
  normalise_rows(candidate_latent.values(), d_count * c.series, len, *cx, *cn);

  // sims[b][i * D + d]
  auto sims = std::make_shared<std::vector<std::vector<double>>>(e.series);
  std::size_t degenerate = 0;
  double total = 0.0;
  for (std::size_t b = 0; b < e.series; ++b) {
    const auto& cand = batch.candidates[b];
    auto& s = (*sims)[b];
    s.assign(cand.size() * d_count, 0.0);
    for (std::size_t d = 0; d < d_count; ++d) {
      const std::size_t er = d * e.series + b;
      double max_s = -2.0;
      for (std::size_t i = 0; i < cand.size(); ++i) {
        const std::size_t cr = d * c.series + cand[i];
        double sim = 0.0;
        if ((*en)[er] == 0.0 || (*cn)[cr] == 0.0) {
          if (policy == DegeneratePolicy::Throw) {
            throw Error(ErrorKind::DegenerateChannel, "latent dimension " + std::to_string(d) + " has zero variance");
          }
          ++degenerate;
        } else {
          sim = std::clamp(dot(ex->data() + er * len, cx->data() + cr * len, len), -1.0, 1.0);
        }
        s[i * d_count + d] = sim;
        max_s = std::max(max_s, sim);
      }
      double z = 0.0;
      for (std::size_t i = 0; i < cand.size(); ++i) z += std::exp(s[i * d_count + d] - max_s);
      total += max_s + std::log(z) - s[batch.matched[b] * d_count + d];
    }
  }
  if (degenerate_count != nullptr) *degenerate_count = degenerate;

  const double scale = 1.0 / static_cast<double>(e.series);
  ad::Tensor loss = ad::Tensor::scalar(total * scale, tape.enabled() && (eeg_latent.requires_grad() || candidate_latent.requires_grad()));
  if (!loss.requires_grad()) return loss;

  tape.record("infonce_loss", [eeg_latent, candidate_latent, loss, batch, ex, cx, en, cn, sims, e, c, scale]() mutable {
    if (!loss.has_grad()) return;
    const double g = loss.grad()[0] * scale;
    const std::size_t d_count = e.dims, len = e.length;
    std::vector<double> dex(ex->size(), 0.0), dcx(cx->size(), 0.0);
    std::vector<double> weights;
    for (std::size_t b = 0; b < e.series; ++b) {
      const auto& cand = batch.candidates[b];
      const auto& s = (*sims)[b];
      weights.resize(cand.size());
      for (std::size_t d = 0; d < d_count; ++d) {
        const std::size_t er = d * e.series + b;
        double max_s = -2.0;
        for (std::size_t i = 0; i < cand.size(); ++i) max_s = std::max(max_s, s[i * d_count + d]);
        double z = 0.0;
        for (std::size_t i = 0; i < cand.size(); ++i) z += std::exp(s[i * d_count + d] - max_s);
        for (std::size_t i = 0; i < cand.size(); ++i) {
          weights[i] = g * (std::exp(s[i * d_count + d] - max_s) / z - (i == batch.matched[b] ? 1.0 : 0.0));
        }
        const double* xh = ex->data() + er * len;
        for (std::size_t i = 0; i < cand.size(); ++i) {
          const std::size_t cr = d * c.series + cand[i];
          if ((*en)[er] == 0.0 || (*cn)[cr] == 0.0) continue;
          const double* yh = cx->data() + cr * len;
          const double r = s[i * d_count + d];
          // d r / d x = (y_hat - r x_hat) / |x_c|, and symmetrically for y.
          const double wx = weights[i] / (*en)[er];
          const double wy = weights[i] / (*cn)[cr];
          double* gx = dex.data() + er * len;
          double* gy = dcx.data() + cr * len;
          for (std::size_t t = 0; t < len; ++t) {
            gx[t] += wx * (yh[t] - r * xh[t]);
            gy[t] += wy * (xh[t] - r * yh[t]);
          }
        }
      }
    }
    if (eeg_latent.requires_grad()) {
      auto gx = eeg_latent.grad_buffer();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += dex[i];
    }
    if (candidate_latent.requires_grad()) {
      auto gy = candidate_latent.grad_buffer();
      for (std::size_t i = 0; i < gy.size(); ++i) gy[i] += dcx[i];
    }
  });
  return loss;
}

ad::Tensor infonce_loss(ad::Tape& tape, const ad::Tensor& eeg_latent, const ad::Tensor& candidates,
                        std::size_t matched_index, DegeneratePolicy policy) {
  if (eeg_latent.rank() != 2 || candidates.rank() != 3) {
    throw Error(ErrorKind::ShapeMismatch, "expected EEG latent [D, T] and candidates [D, N + 1, T]");
  }
  ContrastiveBatch batch;
  batch.candidates.emplace_back(candidates.dim(1));
  std::iota(batch.candidates[0].begin(), batch.candidates[0].end(), std::size_t{0});
  batch.matched.push_back(matched_index);
  return infonce_loss(tape, eeg_latent, candidates, batch, policy);
}

double infonce_lower_bound(std::size_t d_latent, std::size_t n_negatives) {
  return static_cast<double>(d_latent) * std::log1p(static_cast<double>(n_negatives) * std::exp(-2.0));
}

AdamState make_adam_state(const ad::ParameterList& params, const AdamConfig& config) {
  AdamState state;
  state.config = config;
  for (const auto& p : params) {
    state.first_moment.emplace_back(p.tensor.numel(), 0.0);
    state.second_moment.emplace_back(p.tensor.numel(), 0.0);
  }
  return state;
}

void adam_step(AdamState& state, ad::ParameterList& params) {
  if (params.size() != state.first_moment.size()) {
    throw Error(ErrorKind::ShapeMismatch, "Adam state was built for a different parameter list");
  }
  for (const auto& p : params) {
    if (!p.tensor.has_grad()) throw Error(ErrorKind::MissingGradient, "parameter '" + p.name + "' has no gradient");
  }
  const auto& cfg = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(cfg.beta1, t);
  const double correct2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto values = params[k].tensor.values();
    const auto grad = params[k].tensor.grad();
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    for (std::size_t i = 0; i < values.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
      const double m_hat = m[i] / correct1;
      const double v_hat = v[i] / correct2;
      values[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

bool EarlyStopping::update(double accuracy) {
  ++evaluations_;
  if (best_evaluation_ == 0 || accuracy > best_) {
    best_ = accuracy;
    best_evaluation_ = evaluations_;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

std::string trace_csv(std::span<const TraceRow> rows) {
  std::string out = "step,loss,val_accuracy\n";
  char line[128];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%zu,%.10g,%.10g\n", r.step, r.loss, r.val_accuracy);
    out += line;
  }
  return out;
}

void write_trace_csv(const std::filesystem::path& path, std::span<const TraceRow> rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write trace " + path.string());
  out << trace_csv(rows);
}

namespace {

struct Example {
  std::size_t recording;
  std::size_t segment;
};

}  // namespace

TrainResult train_loop(const RunConfig& config, const PreparedData& train, const PreparedData& validation,
                       std::span<const CandidateSet> validation_sets, const TrainHooks& hooks) {
  const auto& tc = config.train;
  tc.validate();
  if (validation_sets.empty() && !hooks.evaluate) {
    throw Error(ErrorKind::EmptyValidation, "no validation candidate sets");
  }
  if (train.recordings.empty()) throw Error(ErrorKind::EmptyInput, "no training recordings");

  MatchModel model(config.model, train.eeg_channels(), train.feature_channels(), tc.seed);
  if (!validation.recordings.empty()) check_compatible(model, validation);
  auto params = model.parameters();
  auto adam = make_adam_state(params, {.lr = tc.lr});
  std::mt19937_64 rng(tc.seed * 0x2545F4914F6CDD1DULL + 1);
  ad::DropoutSource dropout(tc.seed + 0x51ed27);

  std::vector<Example> examples;
  for (std::size_t r = 0; r < train.recordings.size(); ++r) {
    for (std::size_t j = 0; j < train.recordings[r].n_segments; ++j) examples.push_back({r, j});
  }
  std::map<std::string, std::vector<SegmentRef>> stimulus_segments;
  for (const auto& [id, stim] : train.stimuli) stimulus_segments.emplace(id, train.stimulus_segments(id));

  const std::size_t len = train.segment_samples;
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();

  TrainResult result;
  EarlyStopping stopper(tc.patience_evals);
  double loss_sum = 0.0;
  std::size_t loss_count = 0;
  bool warned = false;
  ad::Tape tape;

  for (std::size_t step = 1; step <= tc.max_steps; ++step) {
    std::vector<SegmentSource> eeg_sources;
    std::vector<SegmentSource> feature_sources;
    std::map<std::pair<std::string, std::size_t>, std::size_t> unique;
    ContrastiveBatch batch;
    const auto slot = [&](const SegmentRef& seg) {
      const auto key = std::make_pair(seg.series_id, seg.start_sample);
      const auto [it, inserted] = unique.try_emplace(key, feature_sources.size());
      if (inserted) feature_sources.push_back({&train.stimulus(seg.series_id).features, seg.start_sample});
      return it->second;
    };
    for (std::size_t b = 0; b < tc.batch_size; ++b) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      const auto ex = examples[order[cursor++]];
      const auto& rec = train.recordings[ex.recording];
      eeg_sources.push_back({&rec.eeg, ex.segment * len});
      const auto& segs = stimulus_segments.at(rec.stimulus_id);
      const SegmentRef matched{rec.stimulus_id, ex.segment * len, len};
      std::vector<std::size_t> cand{slot(matched)};
      for (const auto& neg : sample_negatives(segs, matched, tc.n_negatives, rng)) cand.push_back(slot(neg));
      batch.candidates.push_back(std::move(cand));
      batch.matched.push_back(0);
    }

    const auto x = stack_segments(eeg_sources, len, train.standardize);
    const auto f = stack_segments(feature_sources, len, train.standardize);
    tape.clear();
    for (auto& p : params) p.tensor.zero_grad();
    const auto z_eeg = model.eeg().forward(tape, x, true, dropout);
    const auto z_feat = model.features().forward(tape, f);
    std::size_t degenerate = 0;
    auto loss = infonce_loss(tape, z_eeg, z_feat, batch, DegeneratePolicy::ZeroSimilarity, &degenerate);
    if (degenerate > 0) {
      result.degenerate_similarities += degenerate;
      if (!warned) {
        std::clog << "warning: step " << step << ": " << degenerate
                  << " similarities involved a zero-variance latent dimension and were set to 0\n";
        warned = true;
      }
    }
    tape.backward(loss);
    adam_step(adam, params);
    loss_sum += loss.item();
    ++loss_count;
    result.steps = step;

    if (step % tc.eval_every_steps == 0 || step == tc.max_steps) {
      const double acc = hooks.evaluate ? hooks.evaluate(model, step) : accuracy(model, validation, validation_sets);
      const TraceRow row{step, loss_sum / static_cast<double>(loss_count), acc};
      loss_sum = 0.0;
      loss_count = 0;
      result.trace.push_back(row);
      if (hooks.on_evaluation) hooks.on_evaluation(row);
      if (stopper.update(acc)) result.best = make_checkpoint(model, config, acc, step);
      if (stopper.should_stop()) {
        result.stopped_early = true;
        break;
      }
    }
  }
  tape.clear();
  return result;
}

FoldData prepare_fold(const RunConfig& config, const DatasetManifest& manifest) {
  const auto folds = make_folds(manifest, config.folds);
  if (config.fold >= folds.size()) {
    throw Error(ErrorKind::InvalidArgument, "fold " + std::to_string(config.fold) + " requested but only " +
                                                std::to_string(folds.size()) + " are defined");
  }
  FoldData out;
  out.fold = folds[config.fold];
  if (out.fold.validation_recordings.empty()) {
    throw Error(ErrorKind::EmptyValidation, "fold " + std::to_string(config.fold) +
                                                " has no validation recording with an unseen stimulus");
  }
  if (out.fold.training_recordings.empty()) throw Error(ErrorKind::EmptyInput, "fold has no training recordings");
  out.train = prepare_data(manifest, config.model, config.train.segment_seconds, out.fold.training_recordings);
  out.validation = prepare_data(manifest, config.model, config.train.segment_seconds, out.fold.validation_recordings);
  out.validation_sets = build_candidate_sets(out.validation, config.train.n_val_negatives,
                                             config.train.val_sets_per_segment, config.train.seed);
  if (out.validation_sets.empty()) throw Error(ErrorKind::EmptyValidation, "no validation candidate sets");
  return out;
}

TrainResult train_fold(const RunConfig& config, const DatasetManifest& manifest, const TrainHooks& hooks) {
  const auto data = prepare_fold(config, manifest);
  return train_loop(config, data.train, data.validation, data.validation_sets, hooks);
}

}  // namespace eegmatch
