#include "eegmatch/features.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "eegmatch/error.hpp"
#include "eegmatch/filters.hpp"

namespace eegmatch {

namespace {

void require_audio(const TimeSeries& audio) {
  if (audio.channels() != 1) throw Error(ErrorKind::InvalidArgument, "audio must be single-channel");
  if (audio.sample_rate_hz() < 8000.0) throw Error(ErrorKind::InvalidArgument, "audio rate must be at least 8 kHz");
}

// fftw's planner is not reentrant; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::span<double> input() { return {in_, n_}; }

  // |X_k|^2 for k = 0..n/2.
  void power(std::vector<double>& out) {
    fftw_execute(plan_);
    out.resize(n_ / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
  }

 private:
  std::size_t n_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

}  // namespace

TimeSeries envelope(const TimeSeries& audio, double lowpass_hz, double target_hz) {
  require_audio(audio);
  TimeSeries rectified = audio;
  for (double& v : rectified.data()) v = std::abs(v);
  auto smooth = filtfilt(design_band({0.0, lowpass_hz, 4}, audio.sample_rate_hz()), rectified);
  auto out = resample(smooth, target_hz);
  for (double& v : out.data()) v = std::max(v, 0.0);
  return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

TimeSeries mel_spectrogram(const TimeSeries& audio, const MelConfig& config) {
  require_audio(audio);
  if (config.n_mel == 0) throw Error(ErrorKind::InvalidArgument, "n_mel must be positive");
  const double fs = audio.sample_rate_hz();
  const auto n = static_cast<std::ptrdiff_t>(audio.samples());
  const auto window = static_cast<std::ptrdiff_t>(std::llround(config.window_s * fs));
  std::size_t n_fft = 1;
  while (n_fft < static_cast<std::size_t>(window)) n_fft <<= 1;
  const auto frames = static_cast<std::size_t>(std::llround(static_cast<double>(n) * config.frame_rate_hz / fs));
  if (frames == 0 || window < 2) throw Error(ErrorKind::EmptyInput, "audio too short for one mel frame");

  std::vector<double> hann(static_cast<std::size_t>(window));
  for (std::ptrdiff_t i = 0; i < window; ++i) {
    hann[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(window));
  }

  // Triangular filters between n_mel + 2 equally spaced mel points.
  const std::size_t n_bins = n_fft / 2 + 1;
  const double mel_hi = hz_to_mel(fs / 2.0);
  std::vector<double> edges(config.n_mel + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_hi * static_cast<double>(i) / static_cast<double>(config.n_mel + 1));
  }
  Eigen::MatrixXd bank = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(config.n_mel), static_cast<Eigen::Index>(n_bins));
  for (std::size_t m = 0; m < config.n_mel; ++m) {
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * fs / static_cast<double>(n_fft);
      double w = 0.0;
      if (f > edges[m] && f <= edges[m + 1]) {
        w = (f - edges[m]) / (edges[m + 1] - edges[m]);
      } else if (f > edges[m + 1] && f < edges[m + 2]) {
        w = (edges[m + 2] - f) / (edges[m + 2] - edges[m + 1]);
      }
      bank(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) = w;
    }
  }

  RealFft fft(n_fft);
  std::vector<double> power;
  const auto x = audio.channel(0);
  TimeSeries out(config.n_mel, frames, config.frame_rate_hz);
  for (std::size_t j = 0; j < frames; ++j) {
    const auto centre = static_cast<std::ptrdiff_t>(std::llround(static_cast<double>(j) * fs / config.frame_rate_hz));
    const auto start = centre - window / 2;
    auto in = fft.input();
    std::fill(in.begin(), in.end(), 0.0);
    for (std::ptrdiff_t i = 0; i < window; ++i) {
      const auto t = start + i;
      if (t >= 0 && t < n) in[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(t)] * hann[static_cast<std::size_t>(i)];
    }
    fft.power(power);
    const Eigen::Map<const Eigen::VectorXd> p(power.data(), static_cast<Eigen::Index>(power.size()));
    const Eigen::VectorXd energies = bank * p;
    for (std::size_t m = 0; m < config.n_mel; ++m) {
      out(m, j) = std::log(std::max(energies(static_cast<Eigen::Index>(m)), config.log_floor));
    }
  }
  return out;
}

TimeSeries continuous_word_embedding(std::span<const WordToken> words, double duration_s, std::size_t width,
                                     double rate_hz) {
  if (width == 0) throw Error(ErrorKind::InvalidArgument, "embedding width must be positive");
  const auto samples = static_cast<std::size_t>(std::llround(duration_s * rate_hz));
  TimeSeries out(width, samples, rate_hz);
  double last_onset = -1.0;
  for (const auto& w : words) {
    if (w.onset_s < last_onset) {
      throw Error(ErrorKind::UnsortedWords, "word '" + w.text + "' starts before its predecessor");
    }
    if (w.onset_s < 0.0 || w.offset_s < w.onset_s) {
      throw Error(ErrorKind::UnsortedWords, "word '" + w.text + "' has offset before onset");
    }
    if (w.offset_s > duration_s + 1e-9) {
      throw Error(ErrorKind::InvalidArgument, "word '" + w.text + "' ends after the series");
    }
    if (w.embedding.size() != width) {
      throw Error(ErrorKind::WidthMismatch, "word '" + w.text + "' embedding has width " +
                                                std::to_string(w.embedding.size()) + ", expected " +
                                                std::to_string(width));
    }
    last_onset = w.onset_s;
    const auto begin = std::min(samples, static_cast<std::size_t>(std::llround(w.onset_s * rate_hz)));
    const auto end = std::min(samples, static_cast<std::size_t>(std::llround(w.offset_s * rate_hz)));
    for (std::size_t c = 0; c < width; ++c) {
      auto ch = out.channel(c);
      std::fill(ch.begin() + static_cast<std::ptrdiff_t>(begin), ch.begin() + static_cast<std::ptrdiff_t>(end),
                w.embedding[c]);
    }
  }
  return out;
}

TimeSeries fuse_features(const FeatureSet& set, std::span<const std::string> names) {
  if (names.empty()) throw Error(ErrorKind::InvalidArgument, "no feature names to fuse");
  std::vector<const TimeSeries*> members;
  for (const auto& name : names) {
    const auto it = set.find(name);
    if (it == set.end()) throw Error(ErrorKind::MissingFeature, "feature '" + name + "' not present");
    members.push_back(&it->second);
  }
  const std::size_t samples = members.front()->samples();
  std::size_t channels = 0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i]->samples() != samples) {
      throw Error(ErrorKind::LengthMismatch, "feature '" + names[i] + "' has " + std::to_string(members[i]->samples()) +
                                                 " samples, expected " + std::to_string(samples));
    }
    channels += members[i]->channels();
  }
  TimeSeries out(channels, samples, members.front()->sample_rate_hz());
  std::size_t row = 0;
  for (const auto* m : members) {
    for (std::size_t c = 0; c < m->channels(); ++c, ++row) {
      std::copy(m->channel(c).begin(), m->channel(c).end(), out.channel(row).begin());
    }
  }
  return out;
}

}  // namespace eegmatch
