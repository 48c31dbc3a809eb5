#include "edgefl/mlp.hpp"

#include <cmath>
#include <cstring>

#include "edgefl/errors.hpp"

namespace edgefl::nn {

namespace {

// tanh(z) = 1 - 2 / (exp(2z) + 1). Eigen vectorizes exp for doubles but not tanh; this
// form is within a few ulp of std::tanh and saturates cleanly at +-1.
void tanh_in_place(Matrix& z) { z.array() = 1.0 - 2.0 / ((2.0 * z.array()).exp() + 1.0); }

Matrix as_row(std::span<const double> x) {
  return ConstMatrixMap(x.data(), 1, static_cast<Eigen::Index>(x.size()));
}

}  // namespace

MlpParams::MlpParams(MlpShape shape, std::span<const double> values)
    : shape_(shape), values_(values.begin(), values.end()) {
  require(values_.size() == shape_.param_count(), "MlpParams: value count does not match shape");
}

void MlpParams::assign(std::span<const double> values) {
  require(values.size() == values_.size(), "MlpParams::assign: length mismatch");
  std::copy(values.begin(), values.end(), values_.begin());
}

MlpParams init_mlp(const MlpShape& shape, Rng& rng) {
  require(shape.input_dim > 0 && shape.hidden_dim > 0 && shape.output_dim > 0, "init_mlp: zero dimension");
  MlpParams params(shape);
  auto fill = [&rng](double* begin, std::size_t count, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < count; ++i) begin[i] = (2.0 * rng.uniform() - 1.0) * bound;
  };
  double* data = params.values().data();
  const std::size_t n_w1 = shape.hidden_dim * shape.input_dim;
  const std::size_t n_w2 = shape.output_dim * shape.hidden_dim;
  fill(data, n_w1 + shape.hidden_dim, shape.input_dim);
  fill(data + n_w1 + shape.hidden_dim, n_w2 + shape.output_dim, shape.hidden_dim);
  return params;
}

void mlp_forward_batch(const MlpParams& params, const Matrix& inputs, BatchForward& out) {
  require(static_cast<std::size_t>(inputs.cols()) == params.shape().input_dim, "mlp_forward: input dimension mismatch");
  out.hidden.resize(inputs.rows(), params.b1().size());
  out.hidden.noalias() = inputs * params.w1().transpose();
  out.hidden.rowwise() += params.b1();
  tanh_in_place(out.hidden);
  out.q.resize(inputs.rows(), params.b2().size());
  out.q.noalias() = out.hidden * params.w2().transpose();
  out.q.rowwise() += params.b2();
}

BatchForward mlp_forward_batch(const MlpParams& params, const Matrix& inputs) {
  BatchForward out;
  mlp_forward_batch(params, inputs, out);
  return out;
}

std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> x) {
  require(x.size() == params.shape().input_dim, "mlp_forward: input dimension mismatch");
  const BatchForward f = mlp_forward_batch(params, as_row(x));
  return std::vector<double>(f.q.data(), f.q.data() + f.q.size());
}

void mlp_backward_batch(const MlpParams& params, const Matrix& inputs, const BatchForward& forward,
                        const Matrix& output_gradient, MlpParams& grads, Matrix& scratch) {
  const MlpShape& s = params.shape();
  require(static_cast<std::size_t>(inputs.cols()) == s.input_dim, "mlp_backward: input dimension mismatch");
  require(static_cast<std::size_t>(output_gradient.cols()) == s.output_dim &&
              output_gradient.rows() == inputs.rows(),
          "mlp_backward: output gradient shape mismatch");
  require(grads.shape() == s, "mlp_backward: gradient buffer shape mismatch");

  grads.w2().noalias() = output_gradient.transpose() * forward.hidden;
  grads.b2() = output_gradient.colwise().sum();
  scratch.resize(output_gradient.rows(), params.b1().size());
  scratch.noalias() = output_gradient * params.w2();
  scratch.array() *= 1.0 - forward.hidden.array().square();
  grads.w1().noalias() = scratch.transpose() * inputs;
  grads.b1() = scratch.colwise().sum();
}

std::vector<double> mlp_backward_batch(const MlpParams& params, const Matrix& inputs, const BatchForward& forward,
                                       const Matrix& output_gradient) {
  MlpParams grads(params.shape());
  Matrix scratch;
  mlp_backward_batch(params, inputs, forward, output_gradient, grads, scratch);
  return grads.flat();
}

std::vector<double> mlp_backward(const MlpParams& params, std::span<const double> x,
                                 std::span<const double> output_gradient) {
  require(x.size() == params.shape().input_dim, "mlp_backward: input dimension mismatch");
  require(output_gradient.size() == params.shape().output_dim, "mlp_backward: output gradient length mismatch");
  const Matrix input = as_row(x);
  return mlp_backward_batch(params, input, mlp_forward_batch(params, input), as_row(output_gradient));
}

std::uint64_t checksum(std::span<const double> values) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
  require(params.size() == grads.size() && state.m.size() == params.size() && state.v.size() == params.size(),
          "adam_step: shape mismatch");
  for (double g : grads) {
    if (!std::isfinite(g)) throw NumericError("adam_step: non-finite gradient");
  }
  const AdamConfig& c = state.config;
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * grads[i];
    state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / correction1;
    const double v_hat = state.v[i] / correction2;
    params[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
}

}  // namespace edgefl::nn
