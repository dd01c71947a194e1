#include "eegmatch/encoders.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "eegmatch/error.hpp"

namespace eegmatch {

std::vector<std::size_t> default_dilations(std::size_t n_blocks) {
  std::vector<std::size_t> d;
  for (std::size_t j = 0; j < n_blocks; ++j) {
    d.push_back(std::size_t{1} << ((2 * j) % 5));
    d.push_back(std::size_t{1} << ((2 * j + 1) % 5));
  }
  return d;
}

std::vector<std::size_t> EegEncoderConfig::dilations() const {
  return dilation_schedule.empty() ? default_dilations(n_blocks) : dilation_schedule;
}

void EegEncoderConfig::validate() const {
  if (in_channels == 0 || d_hidden == 0 || d_latent == 0) {
    throw Error(ErrorKind::InvalidArgument, "encoder widths must be positive");
  }
  if (kernel == 0 || kernel % 2 == 0) throw Error(ErrorKind::InvalidArgument, "encoder kernel must be odd");
  const auto d = dilations();
  if (d.size() != 2 * n_blocks) {
    throw Error(ErrorKind::InvalidArgument, "dilation schedule needs two entries per block");
  }
  for (auto v : d) {
    if (v == 0) throw Error(ErrorKind::InvalidArgument, "dilations must be positive");
  }
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw Error(ErrorKind::InvalidArgument, "dropout_p must be in [0, 1)");
}

std::size_t receptive_field(const EegEncoderConfig& cfg) {
  const auto d = cfg.dilations();
  return 1 + (cfg.kernel - 1) * std::accumulate(d.begin(), d.end(), std::size_t{0});
}

std::size_t eeg_encoder_parameter_count(const EegEncoderConfig& cfg) {
  const std::size_t c = cfg.in_channels, h = cfg.d_hidden, d = cfg.d_latent, k = cfg.kernel;
  const std::size_t block = 2 * (h * h * k + h) + (h * h + h);
  return (c * c + c) + (h * c + h) + cfg.n_blocks * block + (2 * h * h + 2 * h) + (d * 2 * h + d);
}

namespace {

// U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
ad::Tensor uniform_init(ad::Shape shape, std::size_t fan_in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> v(ad::numel(shape));
  for (auto& x : v) x = (2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0) * bound;
  return ad::Tensor(std::move(shape), std::move(v), true);
}

void add_layer(ad::ParameterList& params, const std::string& name, ad::Shape weight_shape, std::mt19937_64& rng) {
  std::size_t fan_in = 1;
  for (std::size_t i = 1; i < weight_shape.size(); ++i) fan_in *= weight_shape[i];
  const std::size_t out = weight_shape[0];
  params.push_back({name + ".weight", uniform_init(std::move(weight_shape), fan_in, rng)});
  params.push_back({name + ".bias", uniform_init({out}, fan_in, rng)});
}

}  // namespace

EegEncoder::EegEncoder(const EegEncoderConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  if (cfg_.dilation_schedule.empty()) cfg_.dilation_schedule = default_dilations(cfg_.n_blocks);
  std::mt19937_64 rng(seed);
  const std::size_t c = cfg_.in_channels, h = cfg_.d_hidden, k = cfg_.kernel;
  add_layer(params_, "eeg.input", {c, c}, rng);
  add_layer(params_, "eeg.proj", {h, c, 1}, rng);
  for (std::size_t j = 0; j < cfg_.n_blocks; ++j) {
    const std::string prefix = "eeg.block" + std::to_string(j);
    add_layer(params_, prefix + ".conv0", {h, h, k}, rng);
    add_layer(params_, prefix + ".conv1", {h, h, k}, rng);
    add_layer(params_, prefix + ".mix", {h, h, 1}, rng);
  }
  add_layer(params_, "eeg.head0", {2 * h, h, 1}, rng);
  add_layer(params_, "eeg.head1", {cfg_.d_latent, 2 * h, 1}, rng);
}

ad::Tensor EegEncoder::forward(ad::Tape& tape, const ad::Tensor& x, bool training, ad::DropoutSource& dropout) const {
  if (x.rank() < 2 || x.dim(0) != cfg_.in_channels) {
    throw Error(ErrorKind::ShapeMismatch, "EEG encoder expects " + std::to_string(cfg_.in_channels) +
                                              " input channels, got " + ad::shape_string(x.shape()));
  }
  const double p = cfg_.dropout_p;
  std::size_t i = 0;
  auto next = [&]() -> std::pair<const ad::Tensor&, const ad::Tensor&> {
    const auto& w = param(i);
    const auto& b = param(i + 1);
    i += 2;
    return {w, b};
  };

  auto [w_in, b_in] = next();
  ad::Tensor h = ad::linear(tape, x, w_in, b_in);
  auto [w_proj, b_proj] = next();
  h = ad::conv1d(tape, h, w_proj, b_proj);

  for (std::size_t j = 0; j < cfg_.n_blocks; ++j) {
    for (std::size_t layer = 0; layer < 2; ++layer) {
      auto [w, b] = next();
      auto y = ad::conv1d(tape, h, w, b, cfg_.dilation_schedule[2 * j + layer]);
      y = ad::dropout(tape, ad::gelu(tape, y), p, training, dropout);
      h = ad::residual_add(tape, h, y);
    }
    auto [w, b] = next();
    h = ad::dropout(tape, ad::gelu(tape, ad::conv1d(tape, h, w, b)), p, training, dropout);
  }

  auto [w_h0, b_h0] = next();
  h = ad::gelu(tape, ad::conv1d(tape, h, w_h0, b_h0));
  auto [w_h1, b_h1] = next();
  return ad::conv1d(tape, h, w_h1, b_h1);
}

FeatureEncoder::FeatureEncoder(const FeatureEncoderConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  if (cfg.in_channels == 0 || cfg.d_latent == 0) throw Error(ErrorKind::InvalidArgument, "feature encoder widths must be positive");
  std::mt19937_64 rng(seed);
  add_layer(params_, "feat.proj0", {2 * cfg.d_latent, cfg.in_channels, 1}, rng);
  add_layer(params_, "feat.proj1", {cfg.d_latent, 2 * cfg.d_latent, 1}, rng);
}

ad::Tensor FeatureEncoder::forward(ad::Tape& tape, const ad::Tensor& f) const {
  if (f.rank() < 2 || f.dim(0) != cfg_.in_channels) {
    throw Error(ErrorKind::ShapeMismatch, "feature encoder expects " + std::to_string(cfg_.in_channels) +
                                              " input channels, got " + ad::shape_string(f.shape()));
  }
  auto h = ad::gelu(tape, ad::conv1d(tape, f, params_[0].tensor, params_[1].tensor));
  return ad::conv1d(tape, h, params_[2].tensor, params_[3].tensor);
}

}  // namespace eegmatch
