#include "eegmatch/model.hpp"

#include <cstring>
#include <fstream>

#include "eegmatch/error.hpp"

namespace eegmatch {

using nlohmann::json;

namespace {

EegEncoderConfig with_channels(EegEncoderConfig cfg, std::size_t channels) {
  cfg.in_channels = channels;
  return cfg;
}

constexpr char kMagic[4] = {'M', 'M', 'C', 'K'};
constexpr std::uint16_t kVersion = 1;

}  // namespace

MatchModel::MatchModel(const ModelConfig& cfg, std::size_t eeg_channels, std::size_t feature_channels,
                       std::uint64_t seed)
    : cfg_(cfg),
      eeg_(with_channels(cfg.eeg, eeg_channels), seed),
      features_({feature_channels, cfg.eeg.d_latent}, seed ^ 0x9e3779b97f4a7c15ULL) {
  cfg_.eeg = eeg_.config();
}

ad::ParameterList MatchModel::parameters() const {
  ad::ParameterList all = eeg_.parameters();
  all.insert(all.end(), features_.parameters().begin(), features_.parameters().end());
  return all;
}

ModelCheckpoint make_checkpoint(const MatchModel& model, const RunConfig& config, double best_val_accuracy,
                                std::size_t best_step) {
  ModelCheckpoint ck;
  ck.config = config;
  ck.config.model = model.config();
  ck.eeg_channels = model.eeg_channels();
  ck.feature_channels = model.feature_channels();
  for (const auto& p : model.parameters()) {
    ck.parameters.push_back({p.name, p.tensor.shape(), {p.tensor.values().begin(), p.tensor.values().end()}});
  }
  ck.best_val_accuracy = best_val_accuracy;
  ck.best_step = best_step;
  return ck;
}

MatchModel restore_model(const ModelCheckpoint& checkpoint) {
  MatchModel model(checkpoint.config.model, checkpoint.eeg_channels, checkpoint.feature_channels, 0);
  auto params = model.parameters();
  if (params.size() != checkpoint.parameters.size()) {
    throw Error(ErrorKind::ConfigMismatch, "checkpoint holds " + std::to_string(checkpoint.parameters.size()) +
                                               " parameters, model expects " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& src = checkpoint.parameters[i];
    if (src.name != params[i].name || src.shape != params[i].tensor.shape()) {
      throw Error(ErrorKind::ConfigMismatch, "checkpoint parameter '" + src.name + "' " + ad::shape_string(src.shape) +
                                                 " does not match '" + params[i].name + "' " +
                                                 ad::shape_string(params[i].tensor.shape()));
    }
    std::copy(src.values.begin(), src.values.end(), params[i].tensor.values().begin());
  }
  return model;
}

void save_checkpoint(const ModelCheckpoint& checkpoint, const std::filesystem::path& path) {
  json header = {{"config", to_json(checkpoint.config)},
                 {"eeg_channels", checkpoint.eeg_channels},
                 {"feature_channels", checkpoint.feature_channels},
                 {"best_val_accuracy", checkpoint.best_val_accuracy},
                 {"best_step", checkpoint.best_step},
                 {"parameters", json::array()}};
  for (const auto& p : checkpoint.parameters) header["parameters"].push_back({{"name", p.name}, {"shape", p.shape}});
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write checkpoint " + path.string());
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&kVersion), sizeof kVersion);
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& p : checkpoint.parameters) {
    out.write(reinterpret_cast<const char*>(p.values.data()), static_cast<std::streamsize>(p.values.size() * sizeof(double)));
  }
  if (!out) throw Error(ErrorKind::IoError, "failed writing checkpoint " + path.string());
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open checkpoint " + path.string());
  char magic[4];
  std::uint16_t version = 0;
  std::uint64_t len = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw Error(ErrorKind::FormatError, path.string() + ": bad checkpoint magic");
  if (version != kVersion) throw Error(ErrorKind::FormatError, path.string() + ": unsupported checkpoint version");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw Error(ErrorKind::FormatError, path.string() + ": truncated checkpoint header");

  ModelCheckpoint ck;
  try {
    const json header = json::parse(text);
    ck.config = run_config_from_json(header.at("config"));
    ck.eeg_channels = header.at("eeg_channels").get<std::size_t>();
    ck.feature_channels = header.at("feature_channels").get<std::size_t>();
    ck.best_val_accuracy = header.at("best_val_accuracy").get<double>();
    ck.best_step = header.at("best_step").get<std::size_t>();
    for (const auto& p : header.at("parameters")) {
      NamedArray a{p.at("name").get<std::string>(), p.at("shape").get<ad::Shape>(), {}};
      a.values.resize(ad::numel(a.shape));
      in.read(reinterpret_cast<char*>(a.values.data()), static_cast<std::streamsize>(a.values.size() * sizeof(double)));
      if (!in) throw Error(ErrorKind::FormatError, path.string() + ": truncated payload for " + a.name);
      ck.parameters.push_back(std::move(a));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::FormatError, path.string() + ": " + e.what());
  }
  return ck;
}

}  // namespace eegmatch
