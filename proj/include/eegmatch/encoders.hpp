#pragma once

#include <cstdint>
#include <vector>

#include "eegmatch/autodiff.hpp"

namespace eegmatch {

struct EegEncoderConfig {
  std::size_t in_channels = 64;
  std::size_t d_hidden = 256;
  std::size_t d_latent = 64;
  std::size_t n_blocks = 5;
  std::size_t kernel = 3;
  // Two entries per block, one per dilated convolution. Empty selects
  // default_dilations(n_blocks).
  std::vector<std::size_t> dilation_schedule;
  double dropout_p = 0.5;

  std::vector<std::size_t> dilations() const;
  void validate() const;
  friend bool operator==(const EegEncoderConfig&, const EegEncoderConfig&) = default;
};

// Block j uses 2^((2j) mod 5) and 2^((2j+1) mod 5): (1,2), (4,8), (16,1), (2,4), (8,16).
std::vector<std::size_t> default_dilations(std::size_t n_blocks);

// 1 + (K - 1) * sum of all dilations.
std::size_t receptive_field(const EegEncoderConfig& cfg);

// Closed-form parameter count of EegEncoder for `cfg`.
std::size_t eeg_encoder_parameter_count(const EegEncoderConfig& cfg);

// linear(C -> C) -> 1x1 conv(D_h) -> n_blocks x [dilated conv + GELU + dropout
// with residual skip, twice; 1x1 conv + GELU + dropout] -> 1x1 conv(2 D_h) ->
// GELU -> 1x1 conv(D).
class EegEncoder {
 public:
  EegEncoder(const EegEncoderConfig& cfg, std::uint64_t seed);

  const EegEncoderConfig& config() const noexcept { return cfg_; }
  ad::ParameterList& parameters() noexcept { return params_; }
  const ad::ParameterList& parameters() const noexcept { return params_; }

  // x: [C, T] or [C, N, T] -> [D, T] or [D, N, T].
  ad::Tensor forward(ad::Tape& tape, const ad::Tensor& x, bool training, ad::DropoutSource& dropout) const;

 private:
  const ad::Tensor& param(std::size_t i) const { return params_[i].tensor; }

  EegEncoderConfig cfg_;
  ad::ParameterList params_;
};

struct FeatureEncoderConfig {
  std::size_t in_channels = 1;
  std::size_t d_latent = 64;

  friend bool operator==(const FeatureEncoderConfig&, const FeatureEncoderConfig&) = default;
};

// 1x1 conv(2D) -> GELU -> 1x1 conv(D).
class FeatureEncoder {
 public:
  FeatureEncoder(const FeatureEncoderConfig& cfg, std::uint64_t seed);

  const FeatureEncoderConfig& config() const noexcept { return cfg_; }
  ad::ParameterList& parameters() noexcept { return params_; }
  const ad::ParameterList& parameters() const noexcept { return params_; }

  ad::Tensor forward(ad::Tape& tape, const ad::Tensor& f) const;

 private:
  FeatureEncoderConfig cfg_;
  ad::ParameterList params_;
};

}  // namespace eegmatch
