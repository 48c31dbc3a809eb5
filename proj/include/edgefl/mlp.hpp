#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "edgefl/rng.hpp"

namespace edgefl::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;
using VectorMap = Eigen::Map<Eigen::RowVectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::RowVectorXd>;

struct MlpShape {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 200;
  std::size_t output_dim = 0;

  std::size_t param_count() const { return hidden_dim * input_dim + hidden_dim + output_dim * hidden_dim + output_dim; }
  bool operator==(const MlpShape&) const = default;
};

/// One tanh hidden layer, linear output: q = W2 tanh(W1 x + b1) + b2.
///
/// All parameters live in one flat vector in the serialization order
/// [W1 (hidden x input, row-major), b1, W2 (output x hidden, row-major), b2];
/// gradients and optimizer moments use the same layout.
class MlpParams {
 public:
  MlpParams() = default;
  explicit MlpParams(MlpShape shape) : shape_(shape), values_(shape.param_count(), 0.0) {}
  MlpParams(MlpShape shape, std::span<const double> values);

  const MlpShape& shape() const { return shape_; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::vector<double> flat() const { return {values_.begin(), values_.end()}; }
  /// Replace all values; length must match the shape.
  void assign(std::span<const double> values);

  MatrixMap w1() { return {values_.data(), rows1(), cols1()}; }
  VectorMap b1() { return {values_.data() + off_b1(), rows1()}; }
  MatrixMap w2() { return {values_.data() + off_w2(), rows2(), cols2()}; }
  VectorMap b2() { return {values_.data() + off_b2(), rows2()}; }
  ConstMatrixMap w1() const { return {values_.data(), rows1(), cols1()}; }
  ConstVectorMap b1() const { return {values_.data() + off_b1(), rows1()}; }
  ConstMatrixMap w2() const { return {values_.data() + off_w2(), rows2(), cols2()}; }
  ConstVectorMap b2() const { return {values_.data() + off_b2(), rows2()}; }

  bool operator==(const MlpParams&) const = default;

 private:
  Eigen::Index rows1() const { return static_cast<Eigen::Index>(shape_.hidden_dim); }
  Eigen::Index cols1() const { return static_cast<Eigen::Index>(shape_.input_dim); }
  Eigen::Index rows2() const { return static_cast<Eigen::Index>(shape_.output_dim); }
  Eigen::Index cols2() const { return static_cast<Eigen::Index>(shape_.hidden_dim); }
  std::size_t off_b1() const { return shape_.hidden_dim * shape_.input_dim; }
  std::size_t off_w2() const { return off_b1() + shape_.hidden_dim; }
  std::size_t off_b2() const { return off_w2() + shape_.output_dim * shape_.hidden_dim; }

  MlpShape shape_;
  // Over-aligned so every layer block sits at the same address offset in every instance;
  // Eigen's kernels peel differently on differently aligned data, which would otherwise
  // make results depend on where the allocator put the buffer.
  std::vector<double, Eigen::aligned_allocator<double>> values_;
};

/// Each layer uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases included.
MlpParams init_mlp(const MlpShape& shape, Rng& rng);

std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> x);

/// Activations kept for the backward pass; rows are samples.
struct BatchForward {
  Matrix hidden;  // tanh activations, batch x hidden
  Matrix q;       // batch x output
};

BatchForward mlp_forward_batch(const MlpParams& params, const Matrix& inputs);
/// Same, writing into `out` and reusing its storage.
void mlp_forward_batch(const MlpParams& params, const Matrix& inputs, BatchForward& out);

/// Gradient of <output_gradient, q(x)> with respect to every parameter.
std::vector<double> mlp_backward(const MlpParams& params, std::span<const double> x,
                                 std::span<const double> output_gradient);

/// Batched form: sums per-sample gradients for rows of `inputs` and `output_gradient`.
std::vector<double> mlp_backward_batch(const MlpParams& params, const Matrix& inputs, const BatchForward& forward,
                                       const Matrix& output_gradient);
/// Same, writing into `grads` (shaped like `params`); `scratch` is reused between calls.
void mlp_backward_batch(const MlpParams& params, const Matrix& inputs, const BatchForward& forward,
                        const Matrix& output_gradient, MlpParams& grads, Matrix& scratch);

/// Order-sensitive FNV-1a digest of the raw parameter bits.
std::uint64_t checksum(std::span<const double> values);

struct AdamConfig {
  double learning_rate = 0.005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;

  AdamState() = default;
  AdamState(AdamConfig cfg, std::size_t size) : config(cfg), m(size, 0.0), v(size, 0.0) {}
};

/// Bias-corrected Adam update in place. Throws NumericError on a non-finite gradient.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

}  // namespace edgefl::nn
