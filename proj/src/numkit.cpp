#include "ter/numkit.hpp"

#include <algorithm>
#include <cmath>

#include "ter/error.hpp"

namespace ter {

bool DenseMatrix::all_finite() const {
  return std::all_of(data.begin(), data.end(), [](float v) { return std::isfinite(v); });
}

std::vector<float> matvec(const DenseMatrix& w, std::span<const float> x) {
  if (static_cast<std::size_t>(w.cols) != x.size()) {
    throw Error(ErrorCode::Shape,
                "matvec: matrix is " + std::to_string(w.rows) + "x" + std::to_string(w.cols) +
                    " but vector has length " + std::to_string(x.size()));
  }
  std::vector<float> out(static_cast<std::size_t>(w.rows));
  for (int i = 0; i < w.rows; ++i) {
    double acc = 0.0;
    const float* row = w.data.data() + static_cast<std::size_t>(i) * w.cols;
    for (int j = 0; j < w.cols; ++j) acc += static_cast<double>(row[j]) * x[j];
    out[static_cast<std::size_t>(i)] = static_cast<float>(acc);
  }
  return out;
}

std::vector<float> relu(std::span<const float> x) {
  std::vector<float> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0f ? x[i] : 0.0f;
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  return std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0);
}

void adam_step(DenseMatrix& params, const DenseMatrix& grads, AdamState& state) {
  if (!params.same_shape(grads) || !params.same_shape(state.first_moment)) {
    throw Error(ErrorCode::Shape, "adam_step: shape mismatch for tensor '" + state.tensor_name + "'");
  }
  for (std::size_t i = 0; i < grads.data.size(); ++i) {
    if (!std::isfinite(grads.data[i])) {
      throw Error(ErrorCode::Numeric, "adam_step: non-finite gradient in tensor '" +
                                          state.tensor_name + "' at index " + std::to_string(i));
    }
  }
  state.step += 1;
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  const double lr = state.learning_rate;
  const double eps = state.epsilon;
  for (std::size_t i = 0; i < params.data.size(); ++i) {
    const double g = grads.data[i];
    const double m = b1 * state.first_moment.data[i] + (1.0 - b1) * g;
    const double v = b2 * state.second_moment.data[i] + (1.0 - b2) * g * g;
    state.first_moment.data[i] = static_cast<float>(m);
    state.second_moment.data[i] = static_cast<float>(v);
    const double m_hat = m / bc1;
    const double v_hat = v / bc2;
    params.data[i] = static_cast<float>(params.data[i] - lr * m_hat / (std::sqrt(v_hat) + eps));
  }
}

DenseMatrix init_uniform(int rows, int cols, float scale, SeededRng& rng) {
  if (scale <= 0.0f) throw Error(ErrorCode::Arg, "init_uniform: scale must be > 0");
  DenseMatrix m(rows, cols);
  for (auto& v : m.data) v = rng.next_uniform(-scale, scale);
  return m;
}

std::vector<float> dropout_mask(int len, double rate, SeededRng& rng) {
  if (rate < 0.0 || rate > 1.0) {
    throw Error(ErrorCode::Arg, "dropout_mask: rate " + std::to_string(rate) + " outside [0, 1]");
  }
  std::vector<float> mask(static_cast<std::size_t>(len));
  const float keep = rate < 1.0 ? static_cast<float>(1.0 / (1.0 - rate)) : 0.0f;
  for (auto& v : mask) {
    const bool drop = rng.next_unit() < rate;
    v = drop ? 0.0f : keep;
  }
  return mask;
}

}  // namespace ter
