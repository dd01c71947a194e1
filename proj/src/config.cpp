#include "eegmatch/config.hpp"

#include <fstream>

#include "eegmatch/error.hpp"

namespace eegmatch {

using nlohmann::json;

void TrainConfig::validate() const {
  if (!(lr > 0.0) || batch_size == 0 || n_negatives == 0 || eval_every_steps == 0 || patience_evals == 0 ||
      n_val_negatives == 0 || !(segment_seconds > 0.0) || max_steps == 0 || val_sets_per_segment == 0) {
    throw Error(ErrorKind::InvalidArgument, "training configuration values must be positive");
  }
}

json to_json(const RunConfig& cfg) {
  json bands = json::array();
  for (const auto& b : cfg.model.bands) bands.push_back({b.low_hz, b.high_hz});
  const auto& e = cfg.model.eeg;
  return {
      {"model",
       {{"eeg_encoder",
         {{"in_channels", e.in_channels},
          {"d_hidden", e.d_hidden},
          {"d_latent", e.d_latent},
          {"n_blocks", e.n_blocks},
          {"kernel", e.kernel},
          {"dilation_schedule", e.dilations()},
          {"dropout_p", e.dropout_p}}},
        {"bands", bands},
        {"filter_order", cfg.model.bands.empty() ? 4 : cfg.model.bands.front().order},
        {"features", cfg.model.features},
        {"standardize", cfg.model.standardize == Standardization::Recording ? "recording" : "segment"}}},
      {"train",
       {{"lr", cfg.train.lr},
        {"batch_size", cfg.train.batch_size},
        {"n_negatives", cfg.train.n_negatives},
        {"eval_every_steps", cfg.train.eval_every_steps},
        {"patience_evals", cfg.train.patience_evals},
        {"n_val_negatives", cfg.train.n_val_negatives},
        {"segment_seconds", cfg.train.segment_seconds},
        {"seed", cfg.train.seed},
        {"max_steps", cfg.train.max_steps},
        {"val_sets_per_segment", cfg.train.val_sets_per_segment}}},
      {"folds", cfg.folds},
      {"fold", cfg.fold},
  };
}

RunConfig run_config_from_json(const json& doc) {
  RunConfig cfg;
  try {
    if (doc.contains("model")) {
      const auto& m = doc.at("model");
      if (m.contains("eeg_encoder")) {
        const auto& e = m.at("eeg_encoder");
        auto& out = cfg.model.eeg;
        out.in_channels = e.value("in_channels", out.in_channels);
        out.d_hidden = e.value("d_hidden", out.d_hidden);
        out.d_latent = e.value("d_latent", out.d_latent);
        out.n_blocks = e.value("n_blocks", out.n_blocks);
        out.kernel = e.value("kernel", out.kernel);
        out.dilation_schedule = e.value("dilation_schedule", std::vector<std::size_t>{});
        out.dropout_p = e.value("dropout_p", out.dropout_p);
      }
      const int order = m.value("filter_order", 4);
      if (m.contains("bands")) {
        const auto& bands = m.at("bands");
        if (bands.is_string() && bands.get<std::string>() == "standard") {
          cfg.model.bands = standard_eeg_bands(order);
        } else {
          for (const auto& b : bands) cfg.model.bands.push_back({b.at(0).get<double>(), b.at(1).get<double>(), order});
        }
      }
      cfg.model.features = m.value("features", cfg.model.features);
      const auto std_mode = m.value("standardize", std::string("recording"));
      if (std_mode == "recording") {
        cfg.model.standardize = Standardization::Recording;
      } else if (std_mode == "segment") {
        cfg.model.standardize = Standardization::Segment;
      } else {
        throw Error(ErrorKind::InvalidArgument, "standardize must be 'recording' or 'segment'");
      }
    }
    if (doc.contains("train")) {
      const auto& t = doc.at("train");
      auto& out = cfg.train;
      out.lr = t.value("lr", out.lr);
      out.batch_size = t.value("batch_size", out.batch_size);
      out.n_negatives = t.value("n_negatives", out.n_negatives);
      out.eval_every_steps = t.value("eval_every_steps", out.eval_every_steps);
      out.patience_evals = t.value("patience_evals", out.patience_evals);
      out.n_val_negatives = t.value("n_val_negatives", out.n_val_negatives);
      out.segment_seconds = t.value("segment_seconds", out.segment_seconds);
      out.seed = t.value("seed", out.seed);
      out.max_steps = t.value("max_steps", out.max_steps);
      out.val_sets_per_segment = t.value("val_sets_per_segment", out.val_sets_per_segment);
    }
    cfg.folds = doc.value("folds", cfg.folds);
    cfg.fold = doc.value("fold", cfg.fold);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("run config: ") + e.what());
  }
  cfg.train.validate();
  cfg.model.eeg.validate();
  if (cfg.model.features.empty()) throw Error(ErrorKind::InvalidArgument, "run config lists no features");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config " + path.string());
  try {
    return run_config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidArgument, path.string() + ": " + e.what());
  }
}

void save_run_config(const RunConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write config " + path.string());
  out << to_json(cfg).dump(2) << '\n';
}

void apply_override(json& doc, const std::string& key, const std::string& value) {
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const auto part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw Error(ErrorKind::InvalidArgument, "bad override key '" + key + "'");
    if (dot == std::string::npos) {
      json parsed = json::parse(value, nullptr, false);
      (*node)[part] = parsed.is_discarded() ? json(value) : parsed;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

}  // namespace eegmatch
