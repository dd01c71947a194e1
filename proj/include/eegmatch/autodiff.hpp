#pragma once

// Minimal tape-based reverse-mode differentiation over dense 64-bit tensors.
//
// Series tensors are channel-major: shape [C, T] for one series or [C, N, T]
// for N series of equal length. The leading dimension is always the channel
// axis that linear maps and convolutions act on.

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace eegmatch::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);

class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const noexcept { return static_cast<bool>(node_); }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t numel() const { return node_->values.size(); }

  std::span<const double> values() const { return node_->values; }
  std::span<double> values() { return node_->values; }
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  // Empty when no gradient has been accumulated yet.
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> grad() { return node_->grad; }
  // Allocates the gradient buffer on first use.
  std::span<double> grad_buffer() const;
  void zero_grad() const;
  void clear_grad() { node_->grad.clear(); }

  bool same(const Tensor& other) const noexcept { return node_ == other.node_; }
  Tensor clone() const;

 private:
  struct Node {
    Shape shape;
    std::vector<double> values;
    std::vector<double> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Node> node_;
};

struct Parameter {
  std::string name;
  Tensor tensor;
};

using ParameterList = std::vector<Parameter>;

std::size_t count_parameters(const ParameterList& params);

// Ordered record of executed ops. One tape serves one forward/backward pass;
// call clear() before reusing it. A disabled tape records nothing, which is
// how inference runs.
class Tape {
 public:
  explicit Tape(bool enabled = true) : enabled_(enabled) {}

  bool enabled() const noexcept { return enabled_; }
  bool consumed() const noexcept { return consumed_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::string& op_name(std::size_t i) const { return entries_.at(i).op; }

  void record(std::string op, std::function<void()> backward);

  // Seeds d(loss)/d(loss) = 1 and runs recorded ops in reverse. Gradients
  // accumulate into existing buffers. A second call without clear() throws
  // StaleTape.
  void backward(Tensor& loss);

  void clear();

 private:
  struct Entry {
    std::string op;
    std::function<void()> backward;
  };
  std::vector<Entry> entries_;
  bool enabled_;
  bool consumed_ = false;
};

void backward(Tape& tape, Tensor& loss);

// Seeded Bernoulli masks for dropout. A recording source keeps every mask it
// hands out; after freeze() those masks are replayed in order, which keeps the
// network deterministic for gradient checks.
class DropoutSource {
 public:
  explicit DropoutSource(std::uint64_t seed = 0, bool recording = false) : rng_(seed), recording_(recording) {}

  std::vector<double> mask(std::size_t n, double p);
  void freeze();
  void rewind() { next_ = 0; }

 private:
  std::mt19937_64 rng_;
  bool recording_;
  std::vector<std::vector<double>> recorded_;
  bool frozen_ = false;
  std::size_t next_ = 0;
};

// y = W x + b per column; x is [C_in, ...], W [C_out, C_in], b [C_out] or undefined.
Tensor linear(Tape& tape, const Tensor& x, const Tensor& weight, const Tensor& bias);

// "Same"-padded dilated cross-correlation. x is [C_in, T] or [C_in, N, T],
// W is [C_out, C_in, K] with K odd, b is [C_out] or undefined. Series are
// padded independently so nothing leaks across the N axis.
Tensor conv1d(Tape& tape, const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t dilation = 1);

// x * Phi(x) with the exact normal CDF.
Tensor gelu(Tape& tape, const Tensor& x);

// Inverted dropout: kept entries are scaled by 1 / (1 - p). Identity when not training.
Tensor dropout(Tape& tape, const Tensor& x, double p, bool training, DropoutSource& source);

Tensor residual_add(Tape& tape, const Tensor& x, const Tensor& y);

Tensor sum(Tape& tape, const Tensor& x);
Tensor mean(Tape& tape, const Tensor& x);
// sum_i weights[i] * x[i]; weights are constants.
Tensor weighted_sum(Tape& tape, const Tensor& x, std::span<const double> weights);

struct GradCheckReport {
  double max_error = 0.0;  // max |g_auto - g_fd| / max(1, |g_fd|)
  std::string worst_parameter;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
  double tolerance = 0.0;
  bool passed = false;
};

// Compares backward() gradients with central differences of `loss_fn` for
// every entry of every parameter. `loss_fn` must rebuild the loss from the
// current parameter values on the tape it is given.
GradCheckReport finite_difference_check(const std::function<Tensor(Tape&)>& loss_fn, ParameterList& params,
                                        double tolerance, double h = 1e-4);

}  // namespace eegmatch::ad
