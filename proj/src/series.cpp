#include "eegmatch/series.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "eegmatch/error.hpp"

namespace eegmatch {

TimeSeries::TimeSeries(std::size_t channels, std::size_t samples, double sample_rate_hz)
    : channels_(channels), samples_(samples), sample_rate_hz_(sample_rate_hz), data_(channels * samples, 0.0) {
  if (channels == 0 || samples == 0) {
    throw Error(ErrorKind::InvalidArgument, "time series needs at least one channel and one sample");
  }
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
    throw Error(ErrorKind::InvalidArgument, "sample rate must be positive");
  }
}

TimeSeries::TimeSeries(std::size_t channels, double sample_rate_hz, std::vector<double> data)
    : channels_(channels), sample_rate_hz_(sample_rate_hz), data_(std::move(data)) {
  if (channels == 0 || data_.empty() || data_.size() % channels != 0) {
    throw Error(ErrorKind::InvalidArgument, "data size must be a nonzero multiple of the channel count");
  }
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
    throw Error(ErrorKind::InvalidArgument, "sample rate must be positive");
  }
  samples_ = data_.size() / channels;
  require_finite();
}

std::span<const double> TimeSeries::channel(std::size_t c) const {
  return std::span<const double>(data_).subspan(c * samples_, samples_);
}

std::span<double> TimeSeries::channel(std::size_t c) {
  return std::span<double>(data_).subspan(c * samples_, samples_);
}

TimeSeries TimeSeries::slice(std::size_t start, std::size_t length) const {
  if (length == 0 || start + length > samples_) {
    throw Error(ErrorKind::InvalidArgument, "slice [" + std::to_string(start) + ", " +
                                                std::to_string(start + length) + ") exceeds " +
                                                std::to_string(samples_) + " samples");
  }
  TimeSeries out(channels_, length, sample_rate_hz_);
  for (std::size_t c = 0; c < channels_; ++c) {
    auto src = channel(c).subspan(start, length);
    std::copy(src.begin(), src.end(), out.channel(c).begin());
  }
  return out;
}

void TimeSeries::require_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "time series contains non-finite values");
  }
}

namespace {

struct Moments {
  double mean;
  double sd;
};

Moments sample_moments(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, x.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0};
}

}  // namespace

TimeSeries zscore_standardize(const TimeSeries& ts) {
  TimeSeries out = ts;
  for (std::size_t c = 0; c < ts.channels(); ++c) {
    const auto m = sample_moments(ts.channel(c));
    if (m.sd <= kDegenerateEpsilon) {
      throw Error(ErrorKind::DegenerateChannel, "channel " + std::to_string(c) + " has zero variance");
    }
    auto dst = out.channel(c);
    for (double& v : dst) v = (v - m.mean) / m.sd;
    // Second pass removes the residual mean left by rounding.
    const auto r = sample_moments(dst);
    for (double& v : dst) v = (v - r.mean) / r.sd;
  }
  return out;
}

std::size_t segment_length(double seconds, double rate_hz) {
  const double exact = seconds * rate_hz;
  const double rounded = std::round(exact);
  if (!(seconds > 0.0) || rounded < 1.0 || std::abs(exact - rounded) > 1e-9 * std::max(1.0, exact)) {
    throw Error(ErrorKind::InvalidArgument, "segment duration times sample rate must be a positive integer");
  }
  return static_cast<std::size_t>(rounded);
}

std::vector<SegmentRef> segment_nonoverlap(const TimeSeries& ts, double seconds, const std::string& series_id) {
  const std::size_t len = segment_length(seconds, ts.sample_rate_hz());
  const std::size_t count = ts.samples() / len;
  if (count == 0) {
    throw Error(ErrorKind::EmptyInput, "series of " + std::to_string(ts.samples()) +
                                           " samples is shorter than one segment of " + std::to_string(len));
  }
  std::vector<SegmentRef> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back({series_id, i * len, len});
  return out;
}

namespace {

constexpr double kKaiserBeta = 8.6;
// Sinc zero-crossing intervals on each side of the kernel centre.
constexpr double kHalfZeroCrossings = 32.0;

double kaiser(double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  return std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - u * u)) / std::cyl_bessel_i(0.0, kKaiserBeta);
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

bool near_integer(double x) { return std::abs(x - std::round(x)) < 1e-9 && x >= 1.0; }

}  // namespace

TimeSeries resample(const TimeSeries& ts, double target_hz) {
  if (!(target_hz > 0.0) || !std::isfinite(target_hz)) {
    throw Error(ErrorKind::InvalidArgument, "target rate must be positive");
  }
  const double fi = ts.sample_rate_hz();
  if (target_hz == fi) return ts;

  const auto n_in = static_cast<std::ptrdiff_t>(ts.samples());
  const auto n_out = static_cast<std::size_t>(std::llround(static_cast<double>(n_in) * target_hz / fi));
  if (n_out == 0) throw Error(ErrorKind::EmptyInput, "resampled series would be empty");

  // Kernel in units of input samples: cutoff at the lower Nyquist.
  const double cutoff = 0.5 * std::min(fi, target_hz) / fi;  // cycles per input sample
  const double half_width = kHalfZeroCrossings / (2.0 * cutoff);
  const auto half_taps = static_cast<std::ptrdiff_t>(std::ceil(half_width));
  const auto weight = [&](double offset) { return sinc(2.0 * cutoff * offset) * kaiser(offset / half_width); };

  // Rational rates get a polyphase table: output j sits at input position j*M/L.
  std::ptrdiff_t phases = 0;
  std::ptrdiff_t step_m = 0;
  std::vector<double> table;
  if (near_integer(fi) && near_integer(target_hz)) {
    const auto a = std::llround(fi);
    const auto b = std::llround(target_hz);
    const auto g = std::gcd(a, b);
    phases = b / g;
    step_m = a / g;
    const auto taps = 2 * half_taps + 1;
    if (phases * taps <= (std::ptrdiff_t{1} << 22)) {
      table.resize(static_cast<std::size_t>(phases * taps));
      for (std::ptrdiff_t p = 0; p < phases; ++p) {
        const double frac = static_cast<double>(p) / static_cast<double>(phases);
        for (std::ptrdiff_t k = -half_taps; k <= half_taps; ++k) {
          table[static_cast<std::size_t>(p * taps + k + half_taps)] = weight(frac - static_cast<double>(k));
        }
      }
    }
  }

  TimeSeries out(ts.channels(), n_out, target_hz);
  std::vector<double> w(static_cast<std::size_t>(2 * half_taps + 1));
  for (std::size_t j = 0; j < n_out; ++j) {
    std::ptrdiff_t base;
    double frac;
    const double* row = nullptr;
    if (phases > 0) {
      const auto num = static_cast<std::ptrdiff_t>(j) * step_m;
      base = num / phases;
      const auto phase = num % phases;
      frac = static_cast<double>(phase) / static_cast<double>(phases);
      if (!table.empty()) row = &table[static_cast<std::size_t>(phase * (2 * half_taps + 1))];
    } else {
      const double pos = static_cast<double>(j) * fi / target_hz;
      base = static_cast<std::ptrdiff_t>(std::floor(pos));
      frac = pos - static_cast<double>(base);
    }
    const auto k_lo = std::max(-half_taps, -base);
    const auto k_hi = std::min(half_taps, n_in - 1 - base);
    double total = 0.0;
    for (auto k = k_lo; k <= k_hi; ++k) {
      const double v = row ? row[k + half_taps] : weight(frac - static_cast<double>(k));
      w[static_cast<std::size_t>(k + half_taps)] = v;
      total += v;
    }
    for (std::size_t c = 0; c < ts.channels(); ++c) {
      const auto x = ts.channel(c);
      double acc = 0.0;
      for (auto k = k_lo; k <= k_hi; ++k) acc += w[static_cast<std::size_t>(k + half_taps)] * x[static_cast<std::size_t>(base + k)];
      out(c, j) = acc / total;
    }
  }
  return out;
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::LengthMismatch, "pearson inputs differ in length");
  if (x.size() < 2) throw Error(ErrorKind::InvalidArgument, "pearson needs at least two samples");
  const auto mx = sample_moments(x);
  const auto my = sample_moments(y);
  if (mx.sd <= kDegenerateEpsilon || my.sd <= kDegenerateEpsilon) {
    throw Error(ErrorKind::DegenerateChannel, "pearson input has zero variance");
  }
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx.mean;
    const double dy = y[i] - my.mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace eegmatch
