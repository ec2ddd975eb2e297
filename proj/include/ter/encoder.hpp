#pragma once

#include <span>
#include <variant>
#include <vector>

#include "ter/numkit.hpp"

namespace ter {

/// Mean-of-vectors encoder: mean of word embeddings over the actual
/// (non-padding) length, then one dense + Relu layer.
struct MovParams {
  DenseMatrix word_emb;  // V x d_w, row 0 (padding) frozen at zero
  DenseMatrix dense_w;   // k x d_w
  DenseMatrix dense_b;   // 1 x k
};

/// Convolutional encoder: filter bank over word-vector windows with
/// max-over-time pooling. Texts shorter than the filter are right-padded
/// with the zero padding embedding.
struct CnnParams {
  DenseMatrix word_emb;     // V x d_w, row 0 frozen at zero
  DenseMatrix filters;      // n_f x (s * d_w)
  DenseMatrix filter_bias;  // 1 x n_f
  int filter_size = 3;
};

struct MovCache {
  std::vector<int> tokens;  // non-padding tokens actually averaged
  std::vector<float> mean_vec;
  std::vector<float> pre_act;
};

struct CnnCache {
  std::vector<int> tokens;        // right-padded to >= filter_size
  std::vector<int> argmax;        // winning window start per filter
  std::vector<float> best_pre_act;
  int n_windows = 0;
};

/// Encoder embedding plus the intermediates backward needs.
struct EncoderOutput {
  std::vector<float> h1;
  std::variant<MovCache, CnnCache> cache;
};

EncoderOutput mov_forward(const MovParams& params, std::span<const int> tokens);
EncoderOutput cnn_forward(const CnnParams& params, std::span<const int> tokens);

/// Accumulate exact gradients of dL/dh1 into `grads` (same shapes as the
/// params; padding row stays zero). The cache must come from a forward
/// pass with matching parameters.
void mov_backward(const MovParams& params, const EncoderOutput& out,
                  std::span<const float> upstream, MovParams& grads);
void cnn_backward(const CnnParams& params, const EncoderOutput& out,
                  std::span<const float> upstream, CnnParams& grads);

/// One of the two encoder variants, as configured.
using EncoderVariant = std::variant<MovParams, CnnParams>;

int encoder_output_dim(const EncoderVariant& encoder);
EncoderOutput encoder_forward(const EncoderVariant& encoder, std::span<const int> tokens);
void encoder_backward(const EncoderVariant& encoder, const EncoderOutput& out,
                      std::span<const float> upstream, EncoderVariant& grads);

}  // namespace ter
