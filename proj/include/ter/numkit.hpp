#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ter/rng.hpp"

namespace ter {

/// Row-major dense matrix of 32-bit floats. Dot products accumulate in
/// double; storage stays float.
struct DenseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<float> data;

  DenseMatrix() = default;
  DenseMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0f) {}

  float& at(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  float at(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }

  std::span<float> row(int i) { return {data.data() + static_cast<std::size_t>(i) * cols, static_cast<std::size_t>(cols)}; }
  std::span<const float> row(int i) const { return {data.data() + static_cast<std::size_t>(i) * cols, static_cast<std::size_t>(cols)}; }

  std::size_t size() const { return data.size(); }
  bool same_shape(const DenseMatrix& other) const { return rows == other.rows && cols == other.cols; }
  void fill(float v) { std::fill(data.begin(), data.end(), v); }
  bool all_finite() const;
};

/// Adam accumulators for one named parameter tensor.
struct AdamState {
  std::string tensor_name;
  DenseMatrix first_moment;
  DenseMatrix second_moment;
  std::int64_t step = 0;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float epsilon = 1e-8f;
  float learning_rate = 1e-3f;

  AdamState() = default;
  AdamState(std::string name, int rows, int cols, float lr)
      : tensor_name(std::move(name)),
        first_moment(rows, cols),
        second_moment(rows, cols),
        learning_rate(lr) {}
};

/// result[i] = sum_j W[i,j] * x[j], accumulated in double.
std::vector<float> matvec(const DenseMatrix& w, std::span<const float> x);

/// Elementwise max(0, x).
std::vector<float> relu(std::span<const float> x);

/// Numerically stable logistic function.
double sigmoid(double x);

/// Stable log(1 + exp(x)).
double softplus(double x);

/// Bias-corrected Adam update in place; increments the step counter.
/// Rejects non-finite gradient entries, naming the tensor and index.
void adam_step(DenseMatrix& params, const DenseMatrix& grads, AdamState& state);

/// Matrix with entries i.i.d. uniform on [-scale, +scale].
DenseMatrix init_uniform(int rows, int cols, float scale, SeededRng& rng);

/// Inverted dropout mask: entries are 0 with probability `rate`, else
/// 1/(1-rate). rate == 1 yields the all-zero mask. Always consumes
/// exactly `len` draws.
std::vector<float> dropout_mask(int len, double rate, SeededRng& rng);

}  // namespace ter
