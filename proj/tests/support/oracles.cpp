#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace oracle {

EigenPairs jacobi_eigen(Matrix m) {
  const std::size_t n = m.n;
  Matrix v{n, std::vector<double>(n * n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += m(i, j) * m(i, j);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(m(p, q)) < 1e-300) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double mkp = m(k, p), mkq = m(k, q);
          m(k, p) = c * mkp - s * mkq;
          m(k, q) = s * mkp + c * mkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double mpk = m(p, k), mqk = m(q, k);
          m(p, k) = c * mpk - s * mqk;
          m(q, k) = s * mpk + c * mqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return m(a, a) > m(b, b); });
  EigenPairs out;
  for (auto k : order) {
    out.values.push_back(m(k, k));
    std::vector<double> vec(n);
    for (std::size_t i = 0; i < n; ++i) vec[i] = v(i, k);
    out.vectors.push_back(vec);
  }
  return out;
}

Matrix covariance(const std::vector<std::vector<double>>& rows) {
  const std::size_t w = rows.front().size();
  std::vector<double> mean(w, 0.0);
  for (const auto& r : rows)
    for (std::size_t j = 0; j < w; ++j) mean[j] += r[j];
  for (auto& m : mean) m /= static_cast<double>(rows.size());
  Matrix c{w, std::vector<double>(w * w, 0.0)};
  for (const auto& r : rows)
    for (std::size_t i = 0; i < w; ++i)
      for (std::size_t j = 0; j < w; ++j) c(i, j) += (r[i] - mean[i]) * (r[j] - mean[j]);
  for (auto& x : c.a) x /= static_cast<double>(rows.size() - 1);
  return c;
}

double dft_magnitude(std::span<const double> x, double f) {
  std::complex<double> acc = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    acc += x[t] * std::polar(1.0, -2.0 * std::numbers::pi * f * static_cast<double>(t));
  }
  return std::abs(acc) / static_cast<double>(x.size());
}

double pearson(std::span<const double> x, std::span<const double> y) {
  long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  const long double n = static_cast<long double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    syy += static_cast<long double>(y[i]) * y[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  const long double cov = sxy - sx * sy / n;
  const long double vx = sxx - sx * sx / n;
  const long double vy = syy - sy * sy / n;
  return static_cast<double>(cov / std::sqrt(vx * vy));
}

double butterworth_lowpass_gain(double f, double cutoff, double fs, int order) {
  const double w = std::tan(std::numbers::pi * f / fs);
  const double wc = std::tan(std::numbers::pi * cutoff / fs);
  return 1.0 / std::sqrt(1.0 + std::pow(w / wc, 2.0 * order));
}

double butterworth_bandpass_gain(double f, double low, double high, double fs, int order) {
  const double w = std::tan(std::numbers::pi * f / fs);
  const double w1 = std::tan(std::numbers::pi * low / fs);
  const double w2 = std::tan(std::numbers::pi * high / fs);
  const double x = (w * w - w1 * w2) / (w * (w2 - w1));
  return 1.0 / std::sqrt(1.0 + std::pow(x * x, order));
}

Tone fit_tone(std::span<const double> x, double f, double fs) {
  // Normal equations for a cos + b sin.
  double cc = 0, ss = 0, cs = 0, xc = 0, xs = 0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double ph = 2.0 * std::numbers::pi * f * static_cast<double>(t) / fs;
    const double c = std::cos(ph), s = std::sin(ph);
    cc += c * c;
    ss += s * s;
    cs += c * s;
    xc += x[t] * c;
    xs += x[t] * s;
  }
  const double det = cc * ss - cs * cs;
  const double a = (xc * ss - xs * cs) / det;
  const double b = (xs * cc - xc * cs) / det;
  // a cos + b sin = A sin(ph + phase)
  return {std::hypot(a, b), std::atan2(a, b)};
}

Interval binomial_interval(double p, std::size_t n, double z) {
  const double half = z * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  return {p - half, p + half};
}

std::vector<double> gaussian(std::size_t n, std::mt19937_64& rng, double sd) {
  std::normal_distribution<double> dist(0.0, sd);
  std::vector<double> out(n);
  for (auto& v : out) v = dist(rng);
  return out;
}

}  // namespace oracle
