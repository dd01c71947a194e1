// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <malloc.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eegmatch/autodiff.hpp"
#include "eegmatch/cli.hpp"
#include "eegmatch/data.hpp"
#include "eegmatch/dataset.hpp"
#include "eegmatch/encoders.hpp"
#include "eegmatch/error.hpp"
#include "eegmatch/evaluation.hpp"
#include "eegmatch/features.hpp"
#include "eegmatch/filters.hpp"
#include "eegmatch/series.hpp"
#include "eegmatch/training.hpp"
#include "oracles.hpp"

using namespace eegmatch;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failed sub-checks; detail keeps the headline numbers.
class Verdict {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      failures_ += (failures_.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : ", ") + s; }
  Outcome done() const { return {pass_, pass_ ? notes_ : failures_ + (notes_.empty() ? "" : " | " + notes_)}; }

 private:
  bool pass_ = true;
  std::string failures_, notes_;
};

std::string fmt(double v, int prec = 3) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ad::Tensor random_tensor(ad::Shape shape, std::mt19937_64& rng, bool grad = true) {
  const auto n = ad::numel(shape);
  return ad::Tensor(std::move(shape), oracle::gaussian(n, rng), grad);
}

// ---------------------------------------------------------------------------

Outcome gradient_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  std::mt19937_64 rng(101);
  double worst = 0.0;
  const auto run = [&](const std::string& name, const std::function<ad::Tensor(ad::Tape&)>& loss, ad::ParameterList params) {
    const auto r = ad::finite_difference_check(loss, params, 1e-4, 1e-4);
    worst = std::max(worst, r.max_error);
    v.require(r.passed && r.checked == ad::count_parameters(params),
              name + " rel err " + fmt(r.max_error) + " at " + r.worst_parameter);
  };
  const auto proj = [&](std::size_t n) { return oracle::gaussian(n, rng); };

  {
    auto x = random_tensor({3, 2, 5}, rng), w = random_tensor({4, 3}, rng), b = random_tensor({4}, rng);
    const auto p = proj(40);
    run("linear", [&](ad::Tape& t) { return ad::weighted_sum(t, ad::linear(t, x, w, b), p); }, {{"x", x}, {"w", w}, {"b", b}});
  }
  for (std::size_t dilation : {1u, 2u, 4u}) {
    auto x = random_tensor({2, 2, 9}, rng), w = random_tensor({3, 2, 3}, rng), b = random_tensor({3}, rng);
    const auto p = proj(54);
    run("conv1d d=" + std::to_string(dilation),
        [&](ad::Tape& t) { return ad::weighted_sum(t, ad::conv1d(t, x, w, b, dilation), p); },
        {{"x", x}, {"w", w}, {"b", b}});
  }
  {
    auto x = random_tensor({3, 7}, rng);
    const auto p = proj(21);
    run("gelu", [&](ad::Tape& t) { return ad::weighted_sum(t, ad::gelu(t, x), p); }, {{"x", x}});
  }
  {
    auto x = random_tensor({3, 8}, rng);
    const auto p = proj(24);
    ad::DropoutSource src(7, true);
    {
      ad::Tape probe(false);
      ad::dropout(probe, x, 0.5, true, src);
    }
    src.freeze();
    run("dropout",
        [&](ad::Tape& t) {
          src.rewind();
          return ad::weighted_sum(t, ad::dropout(t, x, 0.5, true, src), p);
        },
        {{"x", x}});
  }
  {
    auto x = random_tensor({2, 5}, rng), y = random_tensor({2, 5}, rng);
    const auto p = proj(10);
    run("residual_add", [&](ad::Tape& t) { return ad::weighted_sum(t, ad::residual_add(t, x, y), p); }, {{"x", x}, {"y", y}});
    run("sum", [&](ad::Tape& t) { return ad::sum(t, ad::gelu(t, x)); }, {{"x", x}});
    run("mean", [&](ad::Tape& t) { return ad::mean(t, ad::gelu(t, x)); }, {{"x", x}});
  }
  {
    auto e = random_tensor({2, 8}, rng), c = random_tensor({2, 4, 8}, rng);
    run("infonce", [&](ad::Tape& t) { return infonce_loss(t, e, c, 1); }, {{"eeg", e}, {"candidates", c}});
  }
  {
    EegEncoderConfig cfg;
    cfg.in_channels = 2;
    cfg.d_hidden = 3;
    cfg.d_latent = 2;
    EegEncoder enc(cfg, 3);
    const auto x = random_tensor({2, 2, 8}, rng, false);
    const auto p = proj(2 * 2 * 8);
    ad::DropoutSource src(11, true);
    {
      ad::Tape probe(false);
      enc.forward(probe, x, true, src);
    }
    src.freeze();
    run("eeg encoder",
        [&](ad::Tape& t) {
          src.rewind();
          return ad::weighted_sum(t, enc.forward(t, x, true, src), p);
        },
        enc.parameters());
  }
  {
    FeatureEncoder enc({3, 2}, 5);
    const auto f = random_tensor({3, 2, 6}, rng, false);
    const auto p = proj(24);
    run("feature encoder", [&](ad::Tape& t) { return ad::weighted_sum(t, enc.forward(t, f), p); }, enc.parameters());
  }
  const double secs = seconds_since(t0);
  v.require(secs < 60.0, "took " + fmt(secs) + " s");
  v.note("max rel err " + fmt(worst) + ", " + fmt(secs) + " s");
  return v.done();
}

ad::Tensor signed_copies(const std::vector<double>& z, std::size_t d, std::size_t t, const std::vector<double>& signs) {
  const std::size_t n = signs.size();
  std::vector<double> out(d * n * t);
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t s = 0; s < t; ++s) out[(k * n + i) * t + s] = signs[i] * z[k * t + s];
  return ad::Tensor({d, n, t}, out);
}

Outcome infonce_closed_forms() {
  Verdict v;
  std::mt19937_64 rng(202);
  const std::size_t t = 32;
  double worst = 0.0;
  for (auto [d, n] : std::vector<std::pair<std::size_t, std::size_t>>{{1, 1}, {1, 4}, {1, 32}, {3, 32}}) {
    const auto z = oracle::gaussian(d * t, rng);
    const ad::Tensor eeg({d, t}, z);
    ad::Tape tape(false);
    const double uniform = infonce_loss(tape, eeg, signed_copies(z, d, t, std::vector<double>(n + 1, 1.0)), 0).item();
    std::vector<double> signs(n + 1, -1.0);
    signs[0] = 1.0;
    const double bound = infonce_loss(tape, eeg, signed_copies(z, d, t, signs), 0).item();
    const double dd = static_cast<double>(d), nn = static_cast<double>(n);
    const double e1 = std::abs(uniform - dd * std::log(nn + 1.0));
    const double e2 = std::abs(bound - dd * std::log(1.0 + nn * std::exp(-2.0)));
    worst = std::max({worst, e1, e2});
    v.require(e1 < 1e-9 && e2 < 1e-9, "(D,N)=(" + std::to_string(d) + "," + std::to_string(n) + ") off by " + fmt(std::max(e1, e2)));
  }
  v.note("max abs err " + fmt(worst));
  return v.done();
}

Outcome pearson_properties() {
  Verdict v;
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<std::size_t> len(2, 200);
  std::uniform_real_distribution<double> scale(0.01, 100.0), shift(-100.0, 100.0);
  std::bernoulli_distribution flip(0.5);
  double worst_affine = 0, worst_sym = 0, worst_self = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t n = len(rng);
    const auto x = oracle::gaussian(n, rng), y = oracle::gaussian(n, rng);
    const double a = flip(rng) ? scale(rng) : -scale(rng), b = shift(rng), c = scale(rng), d = shift(rng);
    std::vector<double> ax(n), cy(n);
    for (std::size_t k = 0; k < n; ++k) {
      ax[k] = a * x[k] + b;
      cy[k] = c * y[k] + d;
    }
    const double r = pearson_correlation(x, y);
    worst_affine = std::max(worst_affine, std::abs(pearson_correlation(ax, cy) - (a > 0 ? r : -r)));
    worst_sym = std::max(worst_sym, std::abs(pearson_correlation(y, x) - r));
    worst_self = std::max(worst_self, std::abs(pearson_correlation(x, x) - 1.0));
  }
  v.require(worst_affine <= 1e-12, "affine err " + fmt(worst_affine));
  v.require(worst_sym <= 1e-12, "symmetry err " + fmt(worst_sym));
  v.require(worst_self <= 1e-12, "self err " + fmt(worst_self));
  v.note("10000 vectors, max errs " + fmt(worst_affine) + "/" + fmt(worst_sym) + "/" + fmt(worst_self));
  return v.done();
}

Outcome filter_bank() {
  Verdict v;
  const double fs = 64.0;
  const std::size_t n = 64 * 60;
  const auto tone = [&](double f) {
    std::vector<double> x(n);
    for (std::size_t t = 0; t < n; ++t) x[t] = std::sin(2 * std::numbers::pi * f * static_cast<double>(t) / fs);
    return x;
  };
  // Steady-state middle of the filtered tone, away from edge transients.
  const auto measure = [&](const BiquadCascade& filt, double f) {
    const auto y = filtfilt(filt, tone(f));
    const std::span<const double> mid(y.data() + n / 4, n / 2);
    const auto fit = oracle::fit_tone(mid, f, fs);
    const auto ref = oracle::fit_tone(std::span<const double>(tone(f)).subspan(n / 4, n / 2), f, fs);
    const double dphi = std::remainder(fit.phase - ref.phase, 2 * std::numbers::pi);
    return std::pair{fit.amplitude / ref.amplitude, dphi};
  };
  double min_gain = 1e9, min_atten = 1e9, max_radius = 0, max_phase = 0;
  for (const auto& band : standard_eeg_bands()) {
    const auto filt = design_band(band, fs);
    const std::string name = fmt(band.low_hz) + "-" + fmt(band.high_hz) + " Hz";
    max_radius = std::max(max_radius, filt.max_pole_radius());
    v.require(filt.max_pole_radius() < 1.0, name + " unstable");
    const double centre = band.low_hz == 0.0 ? band.high_hz / 2.0 : std::sqrt(band.low_hz * band.high_hz);
    const auto [gain, phase] = measure(filt, centre);
    min_gain = std::min(min_gain, gain);
    v.require(gain > 0.8, name + " centre gain " + fmt(gain));
    for (double f : {0.9 * centre, centre, 1.1 * centre}) {
      const double ph = std::abs(measure(filt, f).second);
      max_phase = std::max(max_phase, ph);
      v.require(ph < 1e-3, name + " phase " + fmt(ph) + " rad at " + fmt(f) + " Hz");
    }
    std::vector<double> outside;
    if (band.low_hz > 0.0) outside.push_back(band.low_hz / 2.0);
    if (2.0 * band.high_hz < fs / 2.0) outside.push_back(2.0 * band.high_hz);
    for (double f : outside) {
      const double db = -20.0 * std::log10(measure(filt, f).first);
      min_atten = std::min(min_atten, db);
      v.require(db > 20.0, name + " only " + fmt(db) + " dB at " + fmt(f) + " Hz");
    }
  }
  v.note("min centre gain " + fmt(min_gain) + ", min octave attenuation " + fmt(min_atten) + " dB, max pole radius " +
         fmt(max_radius, 6) + ", max in-band phase " + fmt(max_phase) + " rad");
  return v.done();
}

Outcome pca_oracle() {
  Verdict v;
  std::mt19937_64 rng(505);
  std::uniform_int_distribution<std::size_t> width(1, 8);
  double worst_cos = 1.0, worst_var = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t w = width(rng), n = 30 + static_cast<std::size_t>(trial);
    const auto mix = oracle::gaussian(w * w, rng);
    std::vector<std::vector<double>> rows(n, std::vector<double>(w));
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(w));
    for (std::size_t i = 0; i < n; ++i) {
      const auto z = oracle::gaussian(w, rng);
      for (std::size_t j = 0; j < w; ++j) {
        double s = 0;
        for (std::size_t k = 0; k < w; ++k) s += mix[j * w + k] * z[k] * static_cast<double>(k + 1);
        rows[i][j] = s - 2.0;
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
      }
    }
    const auto ref = oracle::jacobi_eigen(oracle::covariance(rows));
    // Only leading components with a distinct eigenvalue have a unique axis.
    std::size_t k = 1;
    while (k < w && std::abs(ref.values[k - 1] - ref.values[k]) > 1e-3 * ref.values[0]) ++k;
    const auto model = pca_fit(m, k);
    for (std::size_t c = 0; c < k; ++c) {
      double dot = 0;
      for (std::size_t j = 0; j < w; ++j)
        dot += model.components(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) * ref.vectors[c][j];
      const double rel = std::abs(model.explained_variance(static_cast<Eigen::Index>(c)) - ref.values[c]) / ref.values[c];
      worst_cos = std::min(worst_cos, std::abs(dot));
      worst_var = std::max(worst_var, rel);
    }
  }
  v.require(worst_cos > 1.0 - 1e-6, "principal-angle cosine " + fmt(worst_cos, 12));
  v.require(worst_var < 1e-6, "variance rel err " + fmt(worst_var));
  v.note("200 matrices, min cosine " + fmt(worst_cos, 12) + ", max variance rel err " + fmt(worst_var));
  return v.done();
}

RunConfig synthetic_run_config() {
  RunConfig cfg;
  cfg.model.eeg.d_hidden = 64;
  cfg.model.features = {kSynthFeature};
  cfg.folds = {"3-4"};
  cfg.train.eval_every_steps = 10;
  cfg.train.max_steps = 60;
  cfg.train.seed = 1;
  return cfg;
}

Outcome synthetic_end_to_end(const fs::path& work) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  SynthSpec spec;
  spec.seed = 7;
  const auto clean = generate_synthetic(spec, work / "synth_clean");
  spec.noise_sigma = std::numeric_limits<double>::infinity();
  const auto noise = generate_synthetic(spec, work / "synth_noise");

  auto cfg = synthetic_run_config();
  TrainHooks hooks;
  hooks.on_evaluation = [](const TraceRow& r) {
    std::cerr << "  clean step " << r.step << " loss " << r.loss << " acc " << r.val_accuracy << std::endl;
  };
  const auto result = train_fold(cfg, clean, hooks);
  const double acc = result.best.best_val_accuracy;
  v.require(acc >= 0.90, "clean accuracy " + fmt(acc));
  v.note("clean acc " + fmt(acc) + " at step " + std::to_string(result.best.best_step));

  cfg.train.max_steps = 30;
  hooks.on_evaluation = [](const TraceRow& r) {
    std::cerr << "  noise step " << r.step << " loss " << r.loss << " acc " << r.val_accuracy << std::endl;
  };
  const auto noisy = train_fold(cfg, noise, hooks);
  // Fresh candidate sets over every recording, two per segment: the selection sets would bias the best
  // checkpoint upward, and many sets per segment cluster the outcomes.
  std::vector<std::size_t> all(noise.recordings.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto data = prepare_data(noise, noisy.best.config.model, cfg.train.segment_seconds, all);
  const auto sets = build_candidate_sets(data, 4, 2, 0xfeed);
  const auto model = restore_model(noisy.best);
  const double chance_acc = accuracy(model, data, sets);
  const auto ci = oracle::binomial_interval(0.2, sets.size(), 2.576);
  v.require(sets.size() >= 1000, "only " + std::to_string(sets.size()) + " noise sets");
  v.require(chance_acc >= ci.lo && chance_acc <= ci.hi,
            "noise accuracy " + fmt(chance_acc) + " outside [" + fmt(ci.lo) + ", " + fmt(ci.hi) + "]");
  v.note("noise acc " + fmt(chance_acc) + " over " + std::to_string(sets.size()) + " sets, 99% CI [" + fmt(ci.lo) + ", " +
         fmt(ci.hi) + "]");
  const double secs = seconds_since(t0);
  v.require(secs <= 900.0, "took " + fmt(secs) + " s");
  v.note(fmt(secs, 4) + " s");
  return v.done();
}

Outcome early_stopping() {
  Verdict v;
  EarlyStopping stop(20);
  std::vector<double> trace{0.3, 0.5, 0.45, 0.5};
  for (int i = 0; i < 40; ++i) trace.push_back(i % 3 == 0 ? 0.5 : 0.2);
  std::size_t stopped = 0;
  for (double a : trace) {
    stop.update(a);
    if (stop.should_stop()) {
      stopped = stop.evaluations();
      break;
    }
  }
  v.require(stopped == 22, "stopped at evaluation " + std::to_string(stopped));
  v.require(stop.best_evaluation() == 2, "best evaluation " + std::to_string(stop.best_evaluation()));

  // Through the training loop with a scripted evaluator: the returned weights are those of the best step.
  SynthSpec spec;
  spec.n_subjects = 4;
  spec.duration_s = 30.0;
  spec.eeg_channels = 4;
  spec.feature_channels = 2;
  const auto dir = fs::temp_directory_path() / "eegmatch_accept_early";
  fs::remove_all(dir);
  const auto m = generate_synthetic(spec, dir);
  RunConfig cfg;
  cfg.model.eeg.d_hidden = 4;
  cfg.model.eeg.d_latent = 3;
  cfg.model.eeg.n_blocks = 1;
  cfg.model.features = {kSynthFeature};
  cfg.folds = {"3-4"};
  cfg.train.batch_size = 2;
  cfg.train.n_negatives = 2;
  cfg.train.eval_every_steps = 1;
  cfg.train.lr = 1e-3;
  std::vector<std::vector<double>> snapshots;
  TrainHooks hooks;
  hooks.evaluate = [&](const MatchModel& model, std::size_t step) {
    std::vector<double> flat;
    for (const auto& p : model.parameters()) flat.insert(flat.end(), p.tensor.values().begin(), p.tensor.values().end());
    snapshots.push_back(std::move(flat));
    return trace.at(step - 1);
  };
  const auto r = train_fold(cfg, m, hooks);
  std::vector<double> best;
  for (const auto& p : r.best.parameters) best.insert(best.end(), p.values.begin(), p.values.end());
  v.require(r.stopped_early && r.trace.size() == 22, "loop ran " + std::to_string(r.trace.size()) + " evaluations");
  v.require(r.best.best_step == 2 && snapshots.size() >= 2 && best == snapshots[1], "checkpoint is not the step-2 model");
  fs::remove_all(dir);
  v.note("stopped after evaluation 22, best at evaluation 2");
  return v.done();
}

Outcome split_hygiene() {
  Verdict v;
  std::mt19937_64 rng(808);
  DatasetManifest m;
  for (int s = 1; s <= 85; ++s) m.subjects.push_back({s});
  for (int k = 1; k <= 85; ++k) m.stimuli.push_back({"own" + std::to_string(k), {}, {}, {}});
  for (int k = 1; k <= 40; ++k) m.stimuli.push_back({"shared" + std::to_string(k), {}, {}, {}});
  std::uniform_int_distribution<int> pool(1, 40);
  for (int s = 1; s <= 85; ++s) {
    m.recordings.push_back({s, "own" + std::to_string(s), "r" + std::to_string(s) + "_own"});
    std::set<int> picked;
    while (picked.size() < 3) picked.insert(pool(rng));
    for (int k : picked) m.recordings.push_back({s, "shared" + std::to_string(k), "r" + std::to_string(s) + "_" + std::to_string(k)});
  }
  const RunConfig defaults;
  const auto folds = make_folds(m, defaults.folds);
  v.require(folds.size() == 5, "expected 5 folds");
  std::size_t checked = 0;
  for (const auto& f : folds) {
    const auto val_ids = parse_subject_ranges(defaults.folds[f.fold_id]);
    std::set<int> train_subjects, val_subjects;
    std::set<std::string> train_stimuli;
    for (auto r : f.training_recordings) {
      train_subjects.insert(m.recordings[r].subject_id);
      train_stimuli.insert(m.recordings[r].stimulus_id);
    }
    for (auto r : f.validation_recordings) {
      val_subjects.insert(m.recordings[r].subject_id);
      v.require(!train_stimuli.contains(m.recordings[r].stimulus_id), "fold " + std::to_string(f.fold_id) + " leaks a stimulus");
    }
    for (int s : val_subjects) v.require(!train_subjects.contains(s), "fold " + std::to_string(f.fold_id) + " shares a subject");
    for (auto r : f.excluded_validation_recordings)
      v.require(train_stimuli.contains(m.recordings[r].stimulus_id), "needless exclusion in fold " + std::to_string(f.fold_id));
    for (std::size_t r = 0; r < m.recordings.size(); ++r) {
      const bool is_val_subject = val_ids.contains(m.recordings[r].subject_id);
      const bool in_train = std::count(f.training_recordings.begin(), f.training_recordings.end(), r) > 0;
      const bool in_val = std::count(f.validation_recordings.begin(), f.validation_recordings.end(), r) > 0;
      const bool in_excl =
          std::count(f.excluded_validation_recordings.begin(), f.excluded_validation_recordings.end(), r) > 0;
      v.require(in_train == !is_val_subject && (in_val + in_excl) == (is_val_subject ? 1 : 0),
                "recording " + std::to_string(r) + " misplaced in fold " + std::to_string(f.fold_id));
      ++checked;
    }
    v.require(!f.validation_recordings.empty(), "fold " + std::to_string(f.fold_id) + " has empty validation");
  }
  v.note(std::to_string(checked) + " recording placements checked");
  return v.done();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism(const fs::path& work) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  const auto data = work / "synth_clean";
  auto cfg = synthetic_run_config();
  cfg.train.max_steps = 20;
  save_run_config(cfg, work / "determinism.json");
  for (const char* run : {"run_a", "run_b"}) {
    const int code = run_cli({"eegmatch", "train", "--config", (work / "determinism.json").string(), "--data",
                              data.string(), "--out", (work / run).string(), "--seed", "11"});
    v.require(code == 0, std::string(run) + " exited " + std::to_string(code));
  }
  const auto a = slurp(work / "run_a" / "trace.csv"), b = slurp(work / "run_b" / "trace.csv");
  v.require(!a.empty() && a == b, "trace CSVs differ");
  v.require(slurp(work / "run_a" / "checkpoint.mmck") == slurp(work / "run_b" / "checkpoint.mmck"), "checkpoints differ");
  v.note(std::to_string(std::count(a.begin(), a.end(), '\n') - 1) + " identical trace rows, " + fmt(seconds_since(t0)) + " s");
  return v.done();
}

Outcome ensemble(const fs::path& work) {
  Verdict v;
  const auto p = [](std::size_t i, std::vector<double> s) { return Prediction{i, std::move(s)}; };
  v.require(ensemble_vote(std::vector<Prediction>{p(1, {0, 0.1, 0}), p(1, {0, 0.2, 0}), p(2, {0, 0, 0.9})}) == 1, "majority");
  v.require(ensemble_vote(std::vector<Prediction>{p(0, {0.4, 0.3, 0}), p(2, {0, 0, 0.8})}) == 2, "tie by score");
  v.require(ensemble_vote(std::vector<Prediction>{p(0, {0.4, 0.4}), p(1, {0.4, 0.4})}) == 0, "tie by index");
  v.require(ensemble_vote(std::vector<Prediction>{p(3, {0, 0, 0, 0.1})}) == 3, "singleton");

  const auto m = load_manifest(work / "synth_clean");
  const auto ck = load_checkpoint(work / "run_a" / "checkpoint.mmck");
  const auto fold = prepare_fold(ck.config, m);
  auto sets = build_candidate_sets(fold.validation, 4, 3, 0xabc);
  std::shuffle(sets.begin(), sets.end(), std::mt19937_64(9));
  sets.resize(std::min<std::size_t>(sets.size(), 500));
  v.require(sets.size() == 500, "only " + std::to_string(sets.size()) + " sets");
  const auto model = restore_model(ck);
  const auto single = predict_sets(model, fold.validation, sets);
  for (std::size_t copies : {2u, 3u, 5u}) {
    std::vector<const MatchModel*> models(copies, &model);
    std::vector<const PreparedData*> data(copies, &fold.validation);
    const auto votes = ensemble_predict(models, data, sets);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < sets.size(); ++i) agree += votes[i].index == single[i].index;
    v.require(agree == sets.size(), std::to_string(copies) + "-copy ensemble disagrees on " + std::to_string(sets.size() - agree));
  }
  v.note("2/3/5-copy ensembles match the single model on 500 sets");
  return v.done();
}

}  // namespace

int main(int argc, char** argv) {
  // Large tensors are freed and reallocated every step; keep them off mmap.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);

  CLI::App app{"Acceptance suite"};
  std::string workdir = (fs::temp_directory_path() / "eegmatch_acceptance").string();
  std::vector<int> only;
  app.add_option("--workdir", workdir, "Scratch directory for synthetic data and runs");
  app.add_option("--only", only, "Run only these criteria (9 and 10 need 6 and 9)");
  CLI11_PARSE(app, argc, argv);
  const fs::path work(workdir);
  fs::remove_all(work);
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient oracle", gradient_oracle},
      {"InfoNCE closed forms", infonce_closed_forms},
      {"Pearson properties", pearson_properties},
      {"filter bank", filter_bank},
      {"PCA oracle", pca_oracle},
      {"synthetic end-to-end", [&] { return synthetic_end_to_end(work); }},
      {"early stopping", early_stopping},
      {"split hygiene", split_hygiene},
      {"determinism", [&] { return determinism(work); }},
      {"ensemble", [&] { return ensemble(work); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << criteria[i].first << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
