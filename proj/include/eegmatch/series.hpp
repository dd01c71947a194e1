#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace eegmatch {

// Channels with a sample standard deviation at or below this are treated as dead.
inline constexpr double kDegenerateEpsilon = 1e-8;

// Multichannel signal stored channel-major: sample t of channel c lives at
// data[c * samples + t]. 64-bit in memory; files carry 32-bit payloads.
class TimeSeries {
 public:
  TimeSeries() = default;
  TimeSeries(std::size_t channels, std::size_t samples, double sample_rate_hz);
  TimeSeries(std::size_t channels, double sample_rate_hz, std::vector<double> data);

  std::size_t channels() const noexcept { return channels_; }
  std::size_t samples() const noexcept { return samples_; }
  double sample_rate_hz() const noexcept { return sample_rate_hz_; }
  double duration_s() const noexcept { return static_cast<double>(samples_) / sample_rate_hz_; }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const double> channel(std::size_t c) const;
  std::span<double> channel(std::size_t c);

  double operator()(std::size_t c, std::size_t t) const { return data_[c * samples_ + t]; }
  double& operator()(std::size_t c, std::size_t t) { return data_[c * samples_ + t]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  // Copy of samples [start, start + length) of every channel.
  TimeSeries slice(std::size_t start, std::size_t length) const;

  // Throws InvalidArgument when any value is NaN or infinite.
  void require_finite() const;

 private:
  std::size_t channels_ = 0;
  std::size_t samples_ = 0;
  double sample_rate_hz_ = 1.0;
  std::vector<double> data_;
};

struct SegmentRef {
  std::string series_id;
  std::size_t start_sample = 0;
  std::size_t length_samples = 0;

  std::size_t end_sample() const noexcept { return start_sample + length_samples; }
  friend bool operator==(const SegmentRef&, const SegmentRef&) = default;
};

// Per-channel (x - mean) / sd with the n-1 sample standard deviation.
TimeSeries zscore_standardize(const TimeSeries& ts);

// Consecutive non-overlapping windows from sample 0; the short remainder is dropped.
std::vector<SegmentRef> segment_nonoverlap(const TimeSeries& ts, double seconds,
                                           const std::string& series_id = {});

// Number of samples in one segment of `seconds` at `rate_hz`; throws unless integral.
std::size_t segment_length(double seconds, double rate_hz);

// Band-limited resampling with a Kaiser-windowed sinc kernel.
TimeSeries resample(const TimeSeries& ts, double target_hz);

double pearson_correlation(std::span<const double> x, std::span<const double> y);

}  // namespace eegmatch
