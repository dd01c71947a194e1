#include "eegmatch/autodiff.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <utility>

#include "eegmatch/error.hpp"

namespace eegmatch::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

ConstMapMat as_matrix(std::span<const double> v, std::size_t rows) {
  return ConstMapMat(v.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(v.size() / rows));
}

MapMat as_matrix(std::span<double> v, std::size_t rows) {
  return MapMat(v.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(v.size() / rows));
}

void require_finite(const Tensor& t, const char* op) {
  for (double v : t.values()) {
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, std::string(op) + " produced a non-finite value");
  }
}

bool wants_grad(const Tape& tape, std::initializer_list<const Tensor*> inputs) {
  if (!tape.enabled()) return false;
  return std::any_of(inputs.begin(), inputs.end(), [](const Tensor* t) { return t->defined() && t->requires_grad(); });
}

}  // namespace

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? ", " : "") + std::to_string(shape[i]);
  return s + "]";
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad) : node_(std::make_shared<Node>()) {
  if (ad::numel(shape) != values.size()) {
    throw Error(ErrorKind::ShapeMismatch, "shape " + shape_string(shape) + " does not hold " + std::to_string(values.size()) + " values");
  }
  node_->shape = std::move(shape);
  node_->values = std::move(values);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const auto n = ad::numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) { return Tensor({}, {value}, requires_grad); }

double Tensor::item() const {
  if (numel() != 1) throw Error(ErrorKind::NonScalarLoss, "item() on tensor of shape " + shape_string(shape()));
  return node_->values[0];
}

std::span<double> Tensor::grad_buffer() const {
  if (node_->grad.empty()) node_->grad.assign(node_->values.size(), 0.0);
  return node_->grad;
}

void Tensor::zero_grad() const { node_->grad.assign(node_->values.size(), 0.0); }

Tensor Tensor::clone() const { return Tensor(node_->shape, node_->values, node_->requires_grad); }

std::size_t count_parameters(const ParameterList& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.tensor.numel();
  return n;
}

void Tape::record(std::string op, std::function<void()> backward) {
  if (!enabled_) return;
  if (consumed_) throw Error(ErrorKind::StaleTape, "recording onto a tape that already ran backward");
  entries_.push_back({std::move(op), std::move(backward)});
}

void Tape::backward(Tensor& loss) {
  if (consumed_) throw Error(ErrorKind::StaleTape, "backward already ran on this tape; clear it first");
  if (!loss.defined() || loss.numel() != 1) {
    throw Error(ErrorKind::NonScalarLoss, "backward needs a scalar loss");
  }
  if (entries_.empty()) throw Error(ErrorKind::StaleTape, "backward on an empty tape");
  loss.grad_buffer()[0] += 1.0;
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) it->backward();
  consumed_ = true;
}

void Tape::clear() {
  entries_.clear();
  consumed_ = false;
}

void backward(Tape& tape, Tensor& loss) { tape.backward(loss); }

std::vector<double> DropoutSource::mask(std::size_t n, double p) {
  if (frozen_) {
    if (next_ >= recorded_.size() || recorded_[next_].size() != n) {
      throw Error(ErrorKind::ShapeMismatch, "frozen dropout masks do not match the forward pass");
    }
    return recorded_[next_++];
  }
  std::vector<double> m(n);
  const double keep_scale = 1.0 / (1.0 - p);
  // Two 32-bit uniforms per draw.
  const auto threshold = static_cast<std::uint64_t>(std::ldexp(p, 32));
  for (std::size_t i = 0; i < n; i += 2) {
    const std::uint64_t bits = rng_();
    m[i] = (bits & 0xffffffffULL) < threshold ? 0.0 : keep_scale;
    if (i + 1 < n) m[i + 1] = (bits >> 32) < threshold ? 0.0 : keep_scale;
  }
  if (recording_) recorded_.push_back(m);
  return m;
}

void DropoutSource::freeze() {
  if (!recording_) throw Error(ErrorKind::InvalidArgument, "only a recording dropout source can be frozen");
  frozen_ = true;
  next_ = 0;
}

namespace {

// out = W * cols (+ b per row). Shared by linear and every convolution so a
// pointwise convolution is bit-identical to a linear layer.
void affine_forward(ConstMapMat w, ConstMapMat cols, const Tensor& bias, MapMat out) {
  out.noalias() = w * cols;
  if (bias.defined()) {
    const auto b = bias.values();
    for (Eigen::Index r = 0; r < out.rows(); ++r) out.row(r).array() += b[static_cast<std::size_t>(r)];
  }
}

void affine_backward(ConstMapMat w, ConstMapMat cols, ConstMapMat dy, Tensor weight, Tensor bias, double* dcols) {
  if (weight.requires_grad()) {
    auto dw = as_matrix(weight.grad_buffer(), static_cast<std::size_t>(w.rows()));
    dw.noalias() += dy * cols.transpose();
  }
  if (bias.defined() && bias.requires_grad()) {
    auto db = bias.grad_buffer();
    // Summed in index order so the result does not depend on buffer alignment.
    for (Eigen::Index r = 0; r < dy.rows(); ++r) {
      double acc = 0.0;
      for (Eigen::Index c = 0; c < dy.cols(); ++c) acc += dy(r, c);
      db[static_cast<std::size_t>(r)] += acc;
    }
  }
  if (dcols != nullptr) {
    MapMat dc(dcols, cols.rows(), cols.cols());
    dc.noalias() += w.transpose() * dy;
  }
}

void check_bias(const Tensor& bias, std::size_t c_out) {
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != c_out)) {
    throw Error(ErrorKind::ShapeMismatch, "bias shape " + shape_string(bias.shape()) + " for " + std::to_string(c_out) + " outputs");
  }
}

struct SeriesLayout {
  std::size_t channels;
  std::size_t series;
  std::size_t length;
};

SeriesLayout series_layout(const Tensor& x) {
  if (x.rank() == 2) return {x.dim(0), 1, x.dim(1)};
  if (x.rank() == 3) return {x.dim(0), x.dim(1), x.dim(2)};
  throw Error(ErrorKind::ShapeMismatch, "series tensor must be [C, T] or [C, N, T], got " + shape_string(x.shape()));
}

// Column block c*K + k holds channel c shifted by (k - (K-1)/2) * dilation,
// zero outside each series.
void im2col(std::span<const double> x, SeriesLayout l, std::size_t k_size, std::size_t dilation, std::span<double> cols) {
  const auto half = static_cast<std::ptrdiff_t>((k_size - 1) / 2);
  const std::size_t width = l.series * l.length;
  const auto len = static_cast<std::ptrdiff_t>(l.length);
  for (std::size_t c = 0; c < l.channels; ++c) {
    for (std::size_t k = 0; k < k_size; ++k) {
      const auto off = (static_cast<std::ptrdiff_t>(k) - half) * static_cast<std::ptrdiff_t>(dilation);
      double* dst = cols.data() + (c * k_size + k) * width;
      const double* src = x.data() + c * width;
      const auto lo = std::clamp<std::ptrdiff_t>(-off, 0, len);
      const auto hi = std::clamp<std::ptrdiff_t>(len - off, 0, len);
      for (std::size_t n = 0; n < l.series; ++n) {
        double* d = dst + n * l.length;
        const double* s = src + n * l.length;
        std::fill(d, d + lo, 0.0);
        if (hi > lo) std::copy(s + lo + off, s + hi + off, d + lo);
        std::fill(d + std::max(hi, lo), d + len, 0.0);
      }
    }
  }
}

void col2im_add(std::span<const double> cols, SeriesLayout l, std::size_t k_size, std::size_t dilation, std::span<double> dx) {
  const auto half = static_cast<std::ptrdiff_t>((k_size - 1) / 2);
  const std::size_t width = l.series * l.length;
  const auto len = static_cast<std::ptrdiff_t>(l.length);
  for (std::size_t c = 0; c < l.channels; ++c) {
    for (std::size_t k = 0; k < k_size; ++k) {
      const auto off = (static_cast<std::ptrdiff_t>(k) - half) * static_cast<std::ptrdiff_t>(dilation);
      const double* src = cols.data() + (c * k_size + k) * width;
      double* dst = dx.data() + c * width;
      const auto lo = std::clamp<std::ptrdiff_t>(-off, 0, len);
      const auto hi = std::clamp<std::ptrdiff_t>(len - off, 0, len);
      for (std::size_t n = 0; n < l.series; ++n) {
        const double* s = src + n * l.length;
        double* d = dst + n * l.length;
        for (auto t = lo; t < hi; ++t) d[t + off] += s[t];
      }
    }
  }
}

}  // namespace

Tensor linear(Tape& tape, const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (weight.rank() != 2 || x.rank() < 1 || x.dim(0) != weight.dim(1)) {
    throw Error(ErrorKind::ShapeMismatch, "linear: weight " + shape_string(weight.shape()) + " vs input " + shape_string(x.shape()));
  }
  const std::size_t c_out = weight.dim(0);
  check_bias(bias, c_out);
  Shape out_shape = x.shape();
  out_shape[0] = c_out;
  Tensor y(out_shape, std::vector<double>(numel(out_shape)), wants_grad(tape, {&x, &weight, &bias}));
  affine_forward(as_matrix(weight.values(), c_out), as_matrix(x.values(), x.dim(0)), bias, as_matrix(y.values(), c_out));
  require_finite(y, "linear");
  if (y.requires_grad()) {
    tape.record("linear", [x, weight, bias, y]() mutable {
      if (!y.has_grad()) return;
      double* dx = x.requires_grad() ? x.grad_buffer().data() : nullptr;
      affine_backward(as_matrix(weight.values(), weight.dim(0)), as_matrix(x.values(), x.dim(0)),
                      as_matrix(std::span<const double>(y.grad()), y.dim(0)), weight, bias, dx);
    });
  }
  return y;
}

Tensor conv1d(Tape& tape, const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t dilation) {
  const auto l = series_layout(x);
  if (weight.rank() != 3 || weight.dim(1) != l.channels) {
    throw Error(ErrorKind::ShapeMismatch, "conv1d: weight " + shape_string(weight.shape()) + " vs input " + shape_string(x.shape()));
  }
  const std::size_t c_out = weight.dim(0);
  const std::size_t k_size = weight.dim(2);
  if (k_size % 2 == 0) throw Error(ErrorKind::ShapeMismatch, "conv1d kernel size must be odd");
  if (dilation == 0) throw Error(ErrorKind::InvalidArgument, "conv1d dilation must be positive");
  check_bias(bias, c_out);

  Shape out_shape = x.shape();
  out_shape[0] = c_out;
  Tensor y(out_shape, std::vector<double>(numel(out_shape)), wants_grad(tape, {&x, &weight, &bias}));
  const auto w = as_matrix(weight.values(), c_out);
  if (k_size == 1) {
    affine_forward(w, as_matrix(x.values(), l.channels), bias, as_matrix(y.values(), c_out));
  } else {
    std::vector<double> cols(l.channels * k_size * l.series * l.length);
    im2col(x.values(), l, k_size, dilation, cols);
    affine_forward(w, as_matrix(std::span<const double>(cols), l.channels * k_size), bias, as_matrix(y.values(), c_out));
  }
  require_finite(y, "conv1d");

  if (y.requires_grad()) {
    tape.record("conv1d", [x, weight, bias, y, l, k_size, dilation]() mutable {
      if (!y.has_grad()) return;
      const auto w = as_matrix(weight.values(), weight.dim(0));
      const auto dy = as_matrix(std::span<const double>(y.grad()), y.dim(0));
      if (k_size == 1) {
        double* dx = x.requires_grad() ? x.grad_buffer().data() : nullptr;
        affine_backward(w, as_matrix(x.values(), l.channels), dy, weight, bias, dx);
        return;
      }
      // Columns are rebuilt rather than kept alive on the tape.
      std::vector<double> cols(l.channels * k_size * l.series * l.length);
      im2col(x.values(), l, k_size, dilation, cols);
      std::vector<double> dcols;
      if (x.requires_grad()) dcols.assign(cols.size(), 0.0);
      affine_backward(w, as_matrix(std::span<const double>(cols), l.channels * k_size), dy, weight, bias,
                      x.requires_grad() ? dcols.data() : nullptr);
      if (x.requires_grad()) col2im_add(dcols, l, k_size, dilation, x.grad_buffer());
    });
  }
  return y;
}

Tensor gelu(Tape& tape, const Tensor& x) {
  Tensor y(x.shape(), std::vector<double>(x.numel()), wants_grad(tape, {&x}));
  const auto xv = x.values();
  auto yv = y.values();
  for (std::size_t i = 0; i < xv.size(); ++i) yv[i] = xv[i] * 0.5 * (1.0 + std::erf(xv[i] * std::numbers::sqrt2 / 2.0));
  if (y.requires_grad()) {
    tape.record("gelu", [x, y]() mutable {
      if (!y.has_grad()) return;
      const auto xv = x.values();
      const auto yv = std::as_const(y).values();
      const auto dy = y.grad();
      auto dx = x.grad_buffer();
      const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
      for (std::size_t i = 0; i < xv.size(); ++i) {
        // y = x * Phi(x), so Phi(x) is recovered without a second erf.
        const double cdf = xv[i] != 0.0 ? yv[i] / xv[i] : 0.5;
        const double pdf = inv_sqrt_2pi * std::exp(-0.5 * xv[i] * xv[i]);
        dx[i] += dy[i] * (cdf + xv[i] * pdf);
      }
    });
  }
  return y;
}

Tensor dropout(Tape& tape, const Tensor& x, double p, bool training, DropoutSource& source) {
  if (!(p >= 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidArgument, "dropout probability must be in [0, 1)");
  if (!training || p == 0.0) return x;
  auto mask = std::make_shared<std::vector<double>>(source.mask(x.numel(), p));
  Tensor y(x.shape(), std::vector<double>(x.numel()), wants_grad(tape, {&x}));
  const auto xv = x.values();
  auto yv = y.values();
  for (std::size_t i = 0; i < xv.size(); ++i) yv[i] = xv[i] * (*mask)[i];
  if (y.requires_grad()) {
    tape.record("dropout", [x, y, mask]() mutable {
      if (!y.has_grad()) return;
      const auto dy = y.grad();
      auto dx = x.grad_buffer();
      for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * (*mask)[i];
    });
  }
  return y;
}

Tensor residual_add(Tape& tape, const Tensor& x, const Tensor& y) {
  if (x.shape() != y.shape()) {
    throw Error(ErrorKind::ShapeMismatch, "residual_add: " + shape_string(x.shape()) + " vs " + shape_string(y.shape()));
  }
  Tensor out(x.shape(), std::vector<double>(x.numel()), wants_grad(tape, {&x, &y}));
  const auto a = x.values();
  const auto b = y.values();
  auto o = out.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = a[i] + b[i];
  if (out.requires_grad()) {
    tape.record("residual_add", [x, y, out]() mutable {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      for (const Tensor* t : {&x, &y}) {
        if (!t->requires_grad()) continue;
        auto d = t->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
      }
    });
  }
  return out;
}

Tensor weighted_sum(Tape& tape, const Tensor& x, std::span<const double> weights) {
  if (weights.size() != x.numel()) throw Error(ErrorKind::ShapeMismatch, "weighted_sum weight count mismatch");
  const auto xv = x.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) acc += weights[i] * xv[i];
  Tensor out = Tensor::scalar(acc, wants_grad(tape, {&x}));
  if (out.requires_grad()) {
    std::vector<double> w(weights.begin(), weights.end());
    tape.record("weighted_sum", [x, out, w = std::move(w)]() mutable {
      if (!out.has_grad()) return;
      const double g = out.grad()[0];
      auto dx = x.grad_buffer();
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g * w[i];
    });
  }
  return out;
}

Tensor sum(Tape& tape, const Tensor& x) {
  const std::vector<double> ones(x.numel(), 1.0);
  return weighted_sum(tape, x, ones);
}

Tensor mean(Tape& tape, const Tensor& x) {
  const std::vector<double> w(x.numel(), 1.0 / static_cast<double>(x.numel()));
  return weighted_sum(tape, x, w);
}

GradCheckReport finite_difference_check(const std::function<Tensor(Tape&)>& loss_fn, ParameterList& params,
                                        double tolerance, double h) {
  for (auto& p : params) p.tensor.zero_grad();
  {
    Tape tape;
    Tensor loss = loss_fn(tape);
    tape.backward(loss);
  }
  GradCheckReport report;
  report.tolerance = tolerance;
  for (auto& p : params) {
    auto values = p.tensor.values();
    const auto analytic = p.tensor.grad();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      Tape off(false);
      values[i] = saved + h;
      const double up = loss_fn(off).item();
      values[i] = saved - h;
      const double down = loss_fn(off).item();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric));
      if (report.checked == 0 || err > report.max_error) {
        report.max_error = err;
        report.worst_parameter = p.name;
        report.worst_index = i;
      }
      ++report.checked;
    }
  }
  report.passed = report.max_error < tolerance;
  return report;
}

}  // namespace eegmatch::ad
