#pragma once

#include <complex>
#include <span>
#include <vector>

#include "eegmatch/series.hpp"

namespace eegmatch {

// low_hz == 0 requests a low-pass; otherwise a band-pass between the edges.
struct BandSpec {
  double low_hz = 0.0;
  double high_hz = 0.0;
  int order = 4;

  friend bool operator==(const BandSpec&, const BandSpec&) = default;
};

// One second-order section, a0 normalised to 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

class BiquadCascade {
 public:
  BiquadCascade() = default;
  explicit BiquadCascade(std::vector<Biquad> sections);

  const std::vector<Biquad>& sections() const noexcept { return sections_; }

  std::complex<double> response(double freq_hz, double fs_hz) const;
  double max_pole_radius() const;
  // Samples of odd extension used on each side by filtfilt.
  std::size_t pad_length() const noexcept { return 3 * (2 * sections_.size() + 1); }

  // Single causal pass. `initial_scale` seeds steady-state conditions for a
  // constant input of that value; zero starts from rest.
  std::vector<double> filter(std::span<const double> x, double initial_scale = 0.0) const;

 private:
  std::vector<Biquad> sections_;
};

// Butterworth design through the bilinear transform with prewarped edges.
// Band-pass designs transform an `order`-pole prototype, giving `order` sections.
BiquadCascade design_band(const BandSpec& spec, double fs_hz);

// Zero-phase forward-backward application with odd-symmetric edge extension.
std::vector<double> filtfilt(const BiquadCascade& filter, std::span<const double> x);
TimeSeries filtfilt(const BiquadCascade& filter, const TimeSeries& ts);

// 0-4, 4-8, 8-12 and 12-30 Hz.
std::vector<BandSpec> standard_eeg_bands(int order = 4);

// Output channel b * ts.channels() + c holds channel c filtered by band b.
TimeSeries multiband_eeg(const TimeSeries& ts, std::span<const BandSpec> bands);

TimeSeries lowpass_embedding(const TimeSeries& ts, double cutoff_hz, int order = 4);

}  // namespace eegmatch
