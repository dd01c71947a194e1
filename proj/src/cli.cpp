#include "eegmatch/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <limits>
#include <map>
#include <set>

#include "eegmatch/config.hpp"
#include "eegmatch/data.hpp"
#include "eegmatch/dataset.hpp"
#include "eegmatch/error.hpp"
#include "eegmatch/evaluation.hpp"
#include "eegmatch/features.hpp"
#include "eegmatch/filters.hpp"
#include "eegmatch/mmts.hpp"
#include "eegmatch/model.hpp"
#include "eegmatch/training.hpp"

namespace eegmatch {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<BandSpec> parse_bands(const std::string& text, int order) {
  if (text == "standard") return standard_eeg_bands(order);
  std::vector<BandSpec> bands;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto dash = part.find('-');
    if (dash == std::string::npos) throw UsageError("band '" + part + "' is not LOW-HIGH");
    try {
      bands.push_back({std::stod(part.substr(0, dash)), std::stod(part.substr(dash + 1)), order});
    } catch (const std::logic_error&) {
      throw UsageError("band '" + part + "' is not LOW-HIGH");
    }
  }
  if (bands.empty()) throw UsageError("no bands given");
  return bands;
}

Standardization parse_standardization(const std::string& s) {
  if (s == "recording") return Standardization::Recording;
  if (s == "segment") return Standardization::Segment;
  throw UsageError("standardization must be 'recording' or 'segment'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

// Rewrites relative paths of `m` so they resolve from `new_root`.
DatasetManifest rebase(DatasetManifest m, const fs::path& new_root) {
  const auto base = fs::weakly_canonical(new_root);
  const auto fix = [&](std::string& p) {
    if (p.empty()) return;
    p = fs::weakly_canonical(m.resolve(p)).lexically_relative(base).generic_string();
  };
  for (auto& s : m.stimuli) {
    for (auto& [name, path] : s.features) fix(path);
    fix(s.words);
    fix(s.audio);
  }
  for (auto& r : m.recordings) fix(r.eeg);
  m.root = new_root;
  return m;
}

void write_json(const json& doc, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << doc.dump(2) << "\n";
    return;
  }
  std::ofstream f(out);
  if (!f) throw Error(ErrorKind::IoError, "cannot write " + out);
  f << doc.dump(2) << "\n";
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  SynthSpec spec;
  std::string noise = "0.1";
  std::string out;
  bool no_words = false;
};

void cmd_synth(SynthArgs& a) {
  if (a.noise == "inf") {
    a.spec.noise_sigma = std::numeric_limits<double>::infinity();
  } else {
    try {
      a.spec.noise_sigma = std::stod(a.noise);
    } catch (const std::logic_error&) {
      throw UsageError("--noise must be a number or 'inf'");
    }
  }
  a.spec.write_words = !a.no_words;
  const auto m = generate_synthetic(a.spec, a.out);
  std::cerr << "wrote " << m.recordings.size() << " recordings of " << m.stimuli.size() << " stimuli to " << a.out
            << "\n";
}

struct PreprocessArgs {
  std::string data, out, bands = "standard", standardize;
  int order = 4;
};

void cmd_preprocess(const PreprocessArgs& a) {
  auto m = load_manifest(a.data);
  validate_manifest(m);
  const auto bands = a.bands == "none" ? std::vector<BandSpec>{} : parse_bands(a.bands, a.order);
  const fs::path out(a.out);
  fs::create_directories(out / "eeg");
  auto next = rebase(m, out);
  for (std::size_t i = 0; i < m.recordings.size(); ++i) {
    auto eeg = read_mmts(m.resolve(m.recordings[i].eeg));
    if (!bands.empty()) eeg = multiband_eeg(eeg, bands);
    if (!a.standardize.empty() && parse_standardization(a.standardize) == Standardization::Recording) {
      eeg = zscore_standardize(eeg);
    }
    const auto name = fs::path("eeg") / fs::path(m.recordings[i].eeg).filename();
    write_mmts(out / name, eeg);
    next.recordings[i].eeg = name.generic_string();
  }
  save_manifest(next, out / kManifestFile);
  std::cerr << "preprocessed " << m.recordings.size() << " recordings into " << a.out << "\n";
}

struct FeaturesArgs {
  std::string data, out, config;
  bool envelope = false, mel = false;
  std::size_t n_mel = 28;
  std::string words;  // output feature name
  std::size_t words_k = 4;
  double words_lowpass = 4.0;
  std::vector<std::string> pca;  // SRC=K[:DST]
  std::string fuse, fused_name;
  int fold = -1;
};

// Stimuli whose data may be used to fit PCA: all, or the training side of a fold.
std::set<std::string> fit_stimuli(const DatasetManifest& m, const FeaturesArgs& a) {
  std::set<std::string> ids;
  if (a.config.empty()) {
    for (const auto& s : m.stimuli) ids.insert(s.id);
    return ids;
  }
  auto cfg = load_run_config(a.config);
  if (a.fold >= 0) cfg.fold = static_cast<std::size_t>(a.fold);
  const auto folds = make_folds(m, cfg.folds);
  if (cfg.fold >= folds.size()) throw UsageError("--fold is out of range");
  for (auto r : folds[cfg.fold].training_recordings) ids.insert(m.recordings[r].stimulus_id);
  return ids;
}

double stimulus_duration(const DatasetManifest& m, const StimulusEntry& s) {
  for (const auto& [name, path] : s.features) {
    const auto ts = read_mmts(m.resolve(path));
    return ts.duration_s();
  }
  if (!s.audio.empty()) return read_wav(m.resolve(s.audio)).duration_s();
  throw Error(ErrorKind::MissingFeature, "stimulus '" + s.id + "' has no feature or audio to take a duration from");
}

TimeSeries at_feature_rate(TimeSeries ts) {
  return ts.sample_rate_hz() == kFeatureRateHz ? ts : resample(ts, kFeatureRateHz);
}

void cmd_features(const FeaturesArgs& a) {
  auto m = load_manifest(a.data);
  validate_manifest(m);
  const fs::path out(a.out.empty() ? a.data : a.out);
  fs::create_directories(out / "stimuli");
  m = rebase(m, out);
  const auto feature_file = [&](const std::string& stim, const std::string& name) {
    return (fs::path("stimuli") / (stim + "_" + name + ".mmts")).generic_string();
  };

  for (auto& s : m.stimuli) {
    if (!a.envelope && !a.mel) break;
    if (s.audio.empty()) throw Error(ErrorKind::MissingFeature, "stimulus '" + s.id + "' has no audio file");
    const auto audio = read_wav(m.resolve(s.audio));
    if (a.envelope) {
      write_mmts(out / feature_file(s.id, "env"), envelope(audio));
      s.features["env"] = feature_file(s.id, "env");
    }
    if (a.mel) {
      MelConfig mc;
      mc.n_mel = a.n_mel;
      write_mmts(out / feature_file(s.id, "mel"), mel_spectrogram(audio, mc));
      s.features["mel"] = feature_file(s.id, "mel");
    }
  }

  if (!a.pca.empty() || !a.words.empty()) {
    const auto fit_ids = fit_stimuli(m, a);
    for (const auto& spec : a.pca) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos) throw UsageError("--pca expects SRC=K[:DST], got '" + spec + "'");
      const auto src = spec.substr(0, eq);
      auto rest = spec.substr(eq + 1);
      std::string dst = src;
      if (const auto colon = rest.find(':'); colon != std::string::npos) {
        dst = rest.substr(colon + 1);
        rest = rest.substr(0, colon);
      }
      std::size_t k = 0;
      try {
        k = std::stoul(rest);
      } catch (const std::logic_error&) {
        throw UsageError("--pca component count '" + rest + "' is not a number");
      }
      std::map<std::string, TimeSeries> series;
      Eigen::Index rows = 0, width = -1;
      for (const auto& s : m.stimuli) {
        const auto it = s.features.find(src);
        if (it == s.features.end()) throw Error(ErrorKind::MissingFeature, "stimulus '" + s.id + "' has no feature '" + src + "'");
        auto ts = at_feature_rate(read_mmts(m.resolve(it->second)));
        if (fit_ids.contains(s.id)) rows += static_cast<Eigen::Index>(ts.samples());
        if (width >= 0 && static_cast<Eigen::Index>(ts.channels()) != width) {
          throw Error(ErrorKind::WidthMismatch, "feature '" + src + "' differs in width across stimuli");
        }
        width = static_cast<Eigen::Index>(ts.channels());
        series.emplace(s.id, std::move(ts));
      }
      Eigen::MatrixXd fit_rows(rows, width);
      Eigen::Index at = 0;
      for (const auto& [id, ts] : series) {
        if (!fit_ids.contains(id)) continue;
        const auto r = to_rows(ts);
        fit_rows.middleRows(at, r.rows()) = r;
        at += r.rows();
      }
      const auto model = pca_fit(fit_rows, k);
      for (auto& s : m.stimuli) {
        write_mmts(out / feature_file(s.id, dst), pca_transform(model, series.at(s.id)));
        s.features[dst] = feature_file(s.id, dst);
      }
    }

    if (!a.words.empty()) {
      std::map<std::string, std::vector<WordToken>> words;
      std::vector<const std::vector<double>*> fit_rows;
      for (const auto& s : m.stimuli) {
        if (s.words.empty()) throw Error(ErrorKind::MissingFeature, "stimulus '" + s.id + "' has no words file");
        words.emplace(s.id, read_words(m.resolve(s.words)));
      }
      for (const auto& [id, list] : words) {
        if (!fit_ids.contains(id)) continue;
        for (const auto& w : list) fit_rows.push_back(&w.embedding);
      }
      if (fit_rows.empty()) throw Error(ErrorKind::EmptyInput, "no words to fit the embedding PCA on");
      const auto width = fit_rows.front()->size();
      Eigen::MatrixXd rows(static_cast<Eigen::Index>(fit_rows.size()), static_cast<Eigen::Index>(width));
      for (std::size_t i = 0; i < fit_rows.size(); ++i) {
        if (fit_rows[i]->size() != width) throw Error(ErrorKind::WidthMismatch, "word embeddings differ in width");
        rows.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(fit_rows[i]->data(), static_cast<Eigen::Index>(width));
      }
      const auto model = pca_fit(rows, a.words_k);
      for (auto& s : m.stimuli) {
        auto list = words.at(s.id);
        for (auto& w : list) {
          if (w.embedding.size() != width) throw Error(ErrorKind::WidthMismatch, "word embeddings differ in width");
          const Eigen::MatrixXd row = Eigen::Map<const Eigen::RowVectorXd>(w.embedding.data(), static_cast<Eigen::Index>(width));
          const Eigen::MatrixXd code = pca_transform(model, row);
          w.embedding.assign(code.data(), code.data() + code.size());
        }
        auto ts = continuous_word_embedding(list, stimulus_duration(m, s), a.words_k);
        if (a.words_lowpass > 0.0) ts = lowpass_embedding(ts, a.words_lowpass);
        write_mmts(out / feature_file(s.id, a.words), ts);
        s.features[a.words] = feature_file(s.id, a.words);
      }
    }
  }

  if (!a.fuse.empty()) {
    const auto names = split_list(a.fuse);
    const auto fused_name = a.fused_name.empty() ? [&] {
      std::string n;
      for (const auto& x : names) n += (n.empty() ? "" : "+") + x;
      return n;
    }() : a.fused_name;
    for (auto& s : m.stimuli) {
      FeatureSet set;
      for (const auto& n : names) {
        const auto it = s.features.find(n);
        if (it == s.features.end()) throw Error(ErrorKind::MissingFeature, "stimulus '" + s.id + "' has no feature '" + n + "'");
        set.emplace(n, read_mmts(m.resolve(it->second)));
      }
      write_mmts(out / feature_file(s.id, fused_name), fuse_features(set, names));
      s.features[fused_name] = feature_file(s.id, fused_name);
    }
  }

  save_manifest(m, out / kManifestFile);
  validate_manifest(m);
}

struct TrainArgs {
  std::string config, data, out;
  int fold = -1;
  long long seed = -1;
  std::vector<std::string> overrides;
};

RunConfig resolve_config(const std::string& path, const std::vector<std::string>& overrides, int fold,
                         long long seed) {
  json doc;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open config " + path);
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::InvalidArgument, path + ": " + e.what());
    }
  } else {
    doc = to_json(RunConfig{});
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set expects KEY=VALUE, got '" + o + "'");
    apply_override(doc, o.substr(0, eq), o.substr(eq + 1));
  }
  auto cfg = run_config_from_json(doc);
  if (fold >= 0) cfg.fold = static_cast<std::size_t>(fold);
  if (seed >= 0) cfg.train.seed = static_cast<std::uint64_t>(seed);
  return cfg;
}

void cmd_train(const TrainArgs& a) {
  const auto cfg = resolve_config(a.config, a.overrides, a.fold, a.seed);
  const auto m = load_manifest(a.data);
  validate_manifest(m);
  const fs::path out(a.out);
  fs::create_directories(out);
  TrainHooks hooks;
  hooks.on_evaluation = [](const TraceRow& r) {
    std::cerr << "step " << r.step << " loss " << r.loss << " val_accuracy " << r.val_accuracy << "\n";
  };
  const auto result = train_fold(cfg, m, hooks);
  save_checkpoint(result.best, out / "checkpoint.mmck");
  write_trace_csv(out / "trace.csv", result.trace);
  save_run_config(cfg, out / "config.json");
  std::cerr << "best val_accuracy " << result.best.best_val_accuracy << " at step " << result.best.best_step << " after "
            << result.steps << " steps" << (result.stopped_early ? " (stopped early)" : "") << "\n";
}

struct EvalArgs {
  std::string checkpoint, data, out, config, recordings = "validation";
  int fold = -1;
  long long seed = -1;
};

// Recordings to evaluate on: the fold's validation side, or every recording.
std::vector<std::size_t> eval_recordings(const DatasetManifest& m, const RunConfig& cfg, const std::string& which) {
  if (which == "all") {
    std::vector<std::size_t> all(m.recordings.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
  }
  if (which != "validation") throw UsageError("--recordings must be 'validation' or 'all'");
  const auto folds = make_folds(m, cfg.folds);
  if (cfg.fold >= folds.size()) throw UsageError("fold out of range");
  if (folds[cfg.fold].validation_recordings.empty()) {
    throw Error(ErrorKind::EmptyValidation, "fold has no validation recordings");
  }
  return folds[cfg.fold].validation_recordings;
}

json report(std::span<const Prediction> predictions, std::span<const CandidateSet> sets) {
  json per_set = json::array();
  for (std::size_t i = 0; i < sets.size(); ++i) {
    per_set.push_back({{"predicted", predictions[i].index}, {"matched", sets[i].matched_index}, {"scores", predictions[i].scores}});
  }
  return {{"accuracy", accuracy(predictions, sets)}, {"n", sets.size()}, {"per_set", per_set}};
}

void cmd_eval(const EvalArgs& a) {
  const auto m = load_manifest(a.data);
  validate_manifest(m);
  ModelCheckpoint ck;
  if (!a.checkpoint.empty()) {
    ck = load_checkpoint(a.checkpoint);
  } else {
    // Untrained model at the configured seed, for chance-level baselines.
    ck.config = resolve_config(a.config, {}, a.fold, a.seed);
  }
  auto cfg = ck.config;
  if (a.fold >= 0) cfg.fold = static_cast<std::size_t>(a.fold);
  if (a.seed >= 0) cfg.train.seed = static_cast<std::uint64_t>(a.seed);
  const auto idx = eval_recordings(m, cfg, a.recordings);
  const auto data = prepare_data(m, cfg.model, cfg.train.segment_seconds, idx);
  const auto model = a.checkpoint.empty() ? MatchModel(cfg.model, data.eeg_channels(), data.feature_channels(), cfg.train.seed)
                                          : restore_model(ck);
  const auto sets = build_candidate_sets(data, cfg.train.n_val_negatives, cfg.train.val_sets_per_segment, cfg.train.seed);
  const auto predictions = predict_sets(model, data, sets);
  write_json(report(predictions, sets), a.out);
}

struct EnsembleArgs {
  std::string checkpoints, data, out, recordings = "validation";
  int fold = -1;
  long long seed = -1;
};

void cmd_ensemble(const EnsembleArgs& a) {
  std::ifstream in(a.checkpoints);
  if (!in) throw Error(ErrorKind::IoError, "cannot open checkpoint list " + a.checkpoints);
  json list;
  try {
    list = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::FormatError, a.checkpoints + ": " + e.what());
  }
  if (list.is_object()) list = list.value("checkpoints", json::array());
  if (!list.is_array() || list.empty()) throw Error(ErrorKind::FormatError, a.checkpoints + " lists no checkpoints");
  const fs::path base = fs::path(a.checkpoints).parent_path();

  const auto m = load_manifest(a.data);
  validate_manifest(m);
  std::vector<ModelCheckpoint> cks;
  for (const auto& p : list) {
    fs::path path(p.get<std::string>());
    if (path.is_relative()) path = base / path;
    cks.push_back(load_checkpoint(path));
  }
  auto lead = cks.front().config;
  if (a.fold >= 0) lead.fold = static_cast<std::size_t>(a.fold);
  if (a.seed >= 0) lead.train.seed = static_cast<std::uint64_t>(a.seed);
  const auto idx = eval_recordings(m, lead, a.recordings);

  std::vector<PreparedData> data;
  std::vector<MatchModel> models;
  for (const auto& ck : cks) {
    data.push_back(prepare_data(m, ck.config.model, lead.train.segment_seconds, idx));
    models.push_back(restore_model(ck));
  }
  const auto sets = build_candidate_sets(data.front(), lead.train.n_val_negatives, lead.train.val_sets_per_segment,
                                         lead.train.seed);
  std::vector<const MatchModel*> mp;
  std::vector<const PreparedData*> dp;
  for (std::size_t i = 0; i < models.size(); ++i) {
    mp.push_back(&models[i]);
    dp.push_back(&data[i]);
  }
  const auto predictions = ensemble_predict(mp, dp, sets);
  auto doc = report(predictions, sets);
  doc["models"] = cks.size();
  write_json(doc, a.out);
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"EEG / speech match-mismatch toolkit"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  c_synth->add_option("--out", synth.out, "Output directory")->required();
  c_synth->add_option("--seed", synth.spec.seed, "Random seed");
  c_synth->add_option("--subjects", synth.spec.n_subjects, "Number of subjects");
  c_synth->add_option("--stimuli", synth.spec.n_stimuli, "Number of stimuli");
  c_synth->add_option("--duration", synth.spec.duration_s, "Seconds per stimulus");
  c_synth->add_option("--eeg-channels", synth.spec.eeg_channels, "EEG channels");
  c_synth->add_option("--feature-channels", synth.spec.feature_channels, "Feature channels");
  c_synth->add_option("--kernel", synth.spec.mixing_kernel_len, "Response kernel length in samples");
  c_synth->add_option("--noise", synth.noise, "Noise sigma relative to signal RMS, or 'inf'");
  c_synth->add_option("--jitter", synth.spec.subject_jitter, "Per-subject spatial map jitter");
  c_synth->add_flag("--no-words", synth.no_words, "Skip the words files");

  PreprocessArgs pre;
  auto* c_pre = app.add_subcommand("preprocess", "Filter-bank and standardize EEG");
  c_pre->add_option("--data", pre.data, "Dataset directory or manifest")->required();
  c_pre->add_option("--out", pre.out, "Output directory")->required();
  c_pre->add_option("--bands", pre.bands, "'standard', 'none' or LOW-HIGH,...");
  c_pre->add_option("--order", pre.order, "Filter order per band");
  c_pre->add_option("--standardize", pre.standardize, "'recording' z-scores whole recordings");

  FeaturesArgs feat;
  auto* c_feat = app.add_subcommand("features", "Build speech features");
  c_feat->add_option("--data", feat.data, "Dataset directory or manifest")->required();
  c_feat->add_option("--out", feat.out, "Output directory (default: in place)");
  c_feat->add_flag("--envelope", feat.envelope, "Envelope from stimulus audio");
  c_feat->add_flag("--mel", feat.mel, "Mel spectrogram from stimulus audio");
  c_feat->add_option("--n-mel", feat.n_mel, "Mel bands");
  c_feat->add_option("--words", feat.words, "Feature name for the continuous word embedding");
  c_feat->add_option("--words-k", feat.words_k, "PCA components of word embeddings");
  c_feat->add_option("--words-lowpass", feat.words_lowpass, "Low-pass cutoff in Hz, 0 disables");
  c_feat->add_option("--pca", feat.pca, "SRC=K[:DST] reduces a feature to K components");
  c_feat->add_option("--fuse", feat.fuse, "Comma-separated features to concatenate");
  c_feat->add_option("--fused-name", feat.fused_name, "Name of the fused feature");
  c_feat->add_option("--config", feat.config, "Run config whose fold limits PCA fitting to training stimuli");
  c_feat->add_option("--fold", feat.fold, "Fold index for --config");

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train one fold");
  c_train->add_option("--config", train.config, "Run config JSON");
  c_train->add_option("--data", train.data, "Dataset directory or manifest")->required();
  c_train->add_option("--out", train.out, "Output directory")->required();
  c_train->add_option("--fold", train.fold, "Fold index");
  c_train->add_option("--seed", train.seed, "Training seed");
  c_train->add_option("--set", train.overrides, "KEY=VALUE config override");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  auto* ev_ck = c_eval->add_option("--checkpoint", ev.checkpoint, "Checkpoint file");
  c_eval->add_option("--config", ev.config, "Run config for an untrained model")->excludes(ev_ck);
  c_eval->add_option("--data", ev.data, "Dataset directory or manifest")->required();
  c_eval->add_option("--out", ev.out, "Report JSON (default: stdout)");
  c_eval->add_option("--fold", ev.fold, "Fold index");
  c_eval->add_option("--seed", ev.seed, "Candidate-set seed");
  c_eval->add_option("--recordings", ev.recordings, "'validation' or 'all'");

  EnsembleArgs ens;
  auto* c_ens = app.add_subcommand("ensemble", "Vote across checkpoints");
  c_ens->add_option("--checkpoints", ens.checkpoints, "JSON list of checkpoint paths")->required();
  c_ens->add_option("--data", ens.data, "Dataset directory or manifest")->required();
  c_ens->add_option("--out", ens.out, "Report JSON (default: stdout)");
  c_ens->add_option("--fold", ens.fold, "Fold index");
  c_ens->add_option("--seed", ens.seed, "Candidate-set seed");
  c_ens->add_option("--recordings", ens.recordings, "'validation' or 'all'");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    if (e.get_exit_code() == 0) return 0;
    std::cerr << app.help();
    return 2;
  }

  try {
    if (*c_synth) cmd_synth(synth);
    if (*c_pre) cmd_preprocess(pre);
    if (*c_feat) cmd_features(feat);
    if (*c_train) cmd_train(train);
    if (*c_eval) cmd_eval(ev);
    if (*c_ens) cmd_ensemble(ens);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> copy = args;
  std::vector<char*> argv;
  for (auto& s : copy) argv.push_back(s.data());
  argv.push_back(nullptr);
  return run_cli(static_cast<int>(copy.size()), argv.data());
}

}  // namespace eegmatch
