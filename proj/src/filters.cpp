#include "eegmatch/filters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eegmatch/error.hpp"

namespace eegmatch {

using cplx = std::complex<double>;

BiquadCascade::BiquadCascade(std::vector<Biquad> sections) : sections_(std::move(sections)) {
  if (sections_.empty()) throw Error(ErrorKind::InvalidArgument, "cascade needs at least one section");
}

std::complex<double> BiquadCascade::response(double freq_hz, double fs_hz) const {
  const cplx z1 = std::polar(1.0, -2.0 * std::numbers::pi * freq_hz / fs_hz);
  const cplx z2 = z1 * z1;
  cplx h = 1.0;
  for (const auto& s : sections_) h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  return h;
}

double BiquadCascade::max_pole_radius() const {
  double r = 0.0;
  for (const auto& s : sections_) {
    // Roots of z^2 + a1 z + a2.
    const cplx disc = std::sqrt(cplx(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
    r = std::max({r, std::abs((-s.a1 + disc) / 2.0), std::abs((-s.a1 - disc) / 2.0)});
  }
  return r;
}

std::vector<double> BiquadCascade::filter(std::span<const double> x, double initial_scale) const {
  std::vector<double> y(x.begin(), x.end());
  double level = initial_scale;
  for (const auto& s : sections_) {
    // Transposed direct form II; steady state for constant input `level`.
    const double dc = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    double z2 = (s.b2 - s.a2 * dc) * level;
    double z1 = (s.b1 - s.a1 * dc) * level + z2;
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
    level *= dc;
  }
  return y;
}

namespace {

cplx bilinear(cplx s, double fs) { return (2.0 * fs + s) / (2.0 * fs - s); }

double prewarp(double f, double fs) { return 2.0 * fs * std::tan(std::numbers::pi * f / fs); }

std::vector<cplx> prototype_poles(int order) {
  std::vector<cplx> poles;
  for (int k = 0; k < order; ++k) {
    poles.push_back(std::polar(1.0, std::numbers::pi * (2.0 * k + order + 1) / (2.0 * order)));
  }
  return poles;
}

// Pairs conjugate digital poles into sections; real poles pair with each other.
std::vector<std::pair<cplx, cplx>> pair_poles(const std::vector<cplx>& poles) {
  std::vector<std::pair<cplx, cplx>> pairs;
  std::vector<double> reals;
  for (const auto& p : poles) {
    if (std::abs(p.imag()) < 1e-12 * std::max(1.0, std::abs(p))) {
      reals.push_back(p.real());
    } else if (p.imag() > 0.0) {
      pairs.emplace_back(p, std::conj(p));
    }
  }
  std::sort(reals.begin(), reals.end());
  for (std::size_t i = 0; i + 1 < reals.size(); i += 2) pairs.emplace_back(reals[i], reals[i + 1]);
  if (reals.size() % 2 == 1) pairs.emplace_back(reals.back(), cplx(0.0));
  return pairs;
}

Biquad section_from(std::pair<cplx, cplx> poles, double b0, double b1, double b2) {
  const cplx sum = poles.first + poles.second;
  const cplx prod = poles.first * poles.second;
  return {b0, b1, b2, -sum.real(), prod.real()};
}

}  // namespace

BiquadCascade design_band(const BandSpec& spec, double fs_hz) {
  const double nyquist = fs_hz / 2.0;
  if (spec.order < 1) throw Error(ErrorKind::InvalidBand, "filter order must be positive");
  if (!(spec.low_hz >= 0.0) || !(spec.high_hz > spec.low_hz) || !(spec.high_hz < nyquist)) {
    throw Error(ErrorKind::InvalidBand, "band " + std::to_string(spec.low_hz) + "-" + std::to_string(spec.high_hz) +
                                            " Hz is invalid for Nyquist " + std::to_string(nyquist) + " Hz");
  }

  std::vector<Biquad> sections;
  if (spec.low_hz == 0.0) {
    const double wc = prewarp(spec.high_hz, fs_hz);
    std::vector<cplx> poles;
    for (const auto& p : prototype_poles(spec.order)) poles.push_back(bilinear(wc * p, fs_hz));
    for (const auto& pair : pair_poles(poles)) {
      const bool first_order = pair.second == cplx(0.0) && spec.order % 2 == 1 && std::abs(pair.first.imag()) < 1e-12;
      sections.push_back(first_order ? section_from(pair, 1.0, 1.0, 0.0) : section_from(pair, 1.0, 2.0, 1.0));
    }
    BiquadCascade raw(sections);
    const double g = std::abs(raw.response(0.0, fs_hz));
    sections.front().b0 /= g;
    sections.front().b1 /= g;
    sections.front().b2 /= g;
    return BiquadCascade(std::move(sections));
  }

  const double w1 = prewarp(spec.low_hz, fs_hz);
  const double w2 = prewarp(spec.high_hz, fs_hz);
  const double bw = w2 - w1;
  const double w0sq = w1 * w2;
  std::vector<cplx> poles;
  for (const auto& p : prototype_poles(spec.order)) {
    const cplx pb = p * bw;
    const cplx root = std::sqrt(pb * pb - 4.0 * w0sq);
    poles.push_back(bilinear((pb + root) / 2.0, fs_hz));
    poles.push_back(bilinear((pb - root) / 2.0, fs_hz));
  }
  // One zero at z = 1 and one at z = -1 per section.
  for (const auto& pair : pair_poles(poles)) sections.push_back(section_from(pair, 1.0, 0.0, -1.0));
  BiquadCascade raw(sections);
  const double center_hz = fs_hz / std::numbers::pi * std::atan(std::sqrt(w0sq) / (2.0 * fs_hz));
  const double g = std::abs(raw.response(center_hz, fs_hz));
  sections.front().b0 /= g;
  sections.front().b1 /= g;
  sections.front().b2 /= g;
  return BiquadCascade(std::move(sections));
}

std::vector<double> filtfilt(const BiquadCascade& filter, std::span<const double> x) {
  const std::size_t pad = filter.pad_length();
  const std::size_t n = x.size();
  if (n <= pad) {
    throw Error(ErrorKind::TooShort, "filtfilt needs more than " + std::to_string(pad) + " samples, got " +
                                         std::to_string(n));
  }
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  auto forward = filter.filter(ext, ext.front());
  std::reverse(forward.begin(), forward.end());
  auto backward = filter.filter(forward, forward.front());
  std::reverse(backward.begin(), backward.end());
  return {backward.begin() + static_cast<std::ptrdiff_t>(pad), backward.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

TimeSeries filtfilt(const BiquadCascade& filter, const TimeSeries& ts) {
  TimeSeries out(ts.channels(), ts.samples(), ts.sample_rate_hz());
  for (std::size_t c = 0; c < ts.channels(); ++c) {
    const auto y = filtfilt(filter, ts.channel(c));
    std::copy(y.begin(), y.end(), out.channel(c).begin());
  }
  return out;
}

std::vector<BandSpec> standard_eeg_bands(int order) {
  return {{0.0, 4.0, order}, {4.0, 8.0, order}, {8.0, 12.0, order}, {12.0, 30.0, order}};
}

TimeSeries multiband_eeg(const TimeSeries& ts, std::span<const BandSpec> bands) {
  if (bands.empty()) throw Error(ErrorKind::InvalidArgument, "filter bank needs at least one band");
  const std::size_t c_in = ts.channels();
  TimeSeries out(c_in * bands.size(), ts.samples(), ts.sample_rate_hz());
  for (std::size_t b = 0; b < bands.size(); ++b) {
    const auto filter = design_band(bands[b], ts.sample_rate_hz());
    for (std::size_t c = 0; c < c_in; ++c) {
      const auto y = filtfilt(filter, ts.channel(c));
      std::copy(y.begin(), y.end(), out.channel(b * c_in + c).begin());
    }
  }
  return out;
}

TimeSeries lowpass_embedding(const TimeSeries& ts, double cutoff_hz, int order) {
  return filtfilt(design_band({0.0, cutoff_hz, order}, ts.sample_rate_hz()), ts);
}

}  // namespace eegmatch
