#include "ter/encoder.hpp"

#include <algorithm>

#include "ter/corpus.hpp"
#include "ter/error.hpp"

namespace ter {

EncoderOutput mov_forward(const MovParams& params, std::span<const int> tokens) {
  if (tokens.empty()) throw Error(ErrorCode::Arg, "mov_forward: empty token sequence");
  MovCache cache;
  for (int t : tokens) {
    if (t != Vocabulary::kPadId) cache.tokens.push_back(t);
  }
  if (cache.tokens.empty()) {
    throw Error(ErrorCode::Arg, "mov_forward: all-padding token sequence");
  }
  const int d_w = params.word_emb.cols;
  std::vector<double> acc(static_cast<std::size_t>(d_w), 0.0);
  for (int t : cache.tokens) {
    const auto row = params.word_emb.row(t);
    for (int j = 0; j < d_w; ++j) acc[static_cast<std::size_t>(j)] += row[static_cast<std::size_t>(j)];
  }
  cache.mean_vec.resize(static_cast<std::size_t>(d_w));
  const double inv_len = 1.0 / static_cast<double>(cache.tokens.size());
  for (int j = 0; j < d_w; ++j) {
    cache.mean_vec[static_cast<std::size_t>(j)] = static_cast<float>(acc[static_cast<std::size_t>(j)] * inv_len);
  }
  auto pre = matvec(params.dense_w, cache.mean_vec);
  for (std::size_t j = 0; j < pre.size(); ++j) pre[j] += params.dense_b.at(0, static_cast<int>(j));
  EncoderOutput out;
  out.h1 = relu(pre);
  cache.pre_act = std::move(pre);
  out.cache = std::move(cache);
  return out;
}

EncoderOutput cnn_forward(const CnnParams& params, std::span<const int> tokens) {
  if (tokens.empty()) throw Error(ErrorCode::Arg, "cnn_forward: empty token sequence");
  const int s = params.filter_size;
  const int d_w = params.word_emb.cols;
  const int n_f = params.filters.rows;

  CnnCache cache;
  cache.tokens.assign(tokens.begin(), tokens.end());
  while (static_cast<int>(cache.tokens.size()) < s) cache.tokens.push_back(Vocabulary::kPadId);
  cache.n_windows = static_cast<int>(cache.tokens.size()) - s + 1;
  cache.argmax.resize(static_cast<std::size_t>(n_f));
  cache.best_pre_act.resize(static_cast<std::size_t>(n_f));

  EncoderOutput out;
  out.h1.resize(static_cast<std::size_t>(n_f));
  for (int f = 0; f < n_f; ++f) {
    const auto filter = params.filters.row(f);
    double best = 0.0;
    int best_pos = 0;
    for (int pos = 0; pos < cache.n_windows; ++pos) {
      double z = params.filter_bias.at(0, f);
      for (int u = 0; u < s; ++u) {
        const auto word = params.word_emb.row(cache.tokens[static_cast<std::size_t>(pos + u)]);
        const float* fslice = filter.data() + static_cast<std::size_t>(u) * d_w;
        for (int j = 0; j < d_w; ++j) z += static_cast<double>(fslice[j]) * word[static_cast<std::size_t>(j)];
      }
      if (pos == 0 || z > best) {
        best = z;
        best_pos = pos;
      }
    }
    cache.argmax[static_cast<std::size_t>(f)] = best_pos;
    cache.best_pre_act[static_cast<std::size_t>(f)] = static_cast<float>(best);
    out.h1[static_cast<std::size_t>(f)] = best > 0.0 ? static_cast<float>(best) : 0.0f;
  }
  out.cache = std::move(cache);
  return out;
}

void mov_backward(const MovParams& params, const EncoderOutput& out,
                  std::span<const float> upstream, MovParams& grads) {
  const auto* cache = std::get_if<MovCache>(&out.cache);
  if (cache == nullptr) throw Error(ErrorCode::State, "mov_backward: cache is not from mov_forward");
  const int k = params.dense_w.rows;
  const int d_w = params.dense_w.cols;
  if (static_cast<int>(upstream.size()) != k || static_cast<int>(cache->mean_vec.size()) != d_w ||
      !grads.dense_w.same_shape(params.dense_w) || !grads.word_emb.same_shape(params.word_emb)) {
    throw Error(ErrorCode::State, "mov_backward: cache/params shape mismatch");
  }

  // Relu gate, then dense layer.
  std::vector<float> dz(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    dz[static_cast<std::size_t>(i)] =
        cache->pre_act[static_cast<std::size_t>(i)] > 0.0f ? upstream[static_cast<std::size_t>(i)] : 0.0f;
  }
  std::vector<double> d_mean(static_cast<std::size_t>(d_w), 0.0);
  for (int i = 0; i < k; ++i) {
    const float g = dz[static_cast<std::size_t>(i)];
    if (g == 0.0f) continue;
    grads.dense_b.at(0, i) += g;
    auto wrow = params.dense_w.row(i);
    auto grow = grads.dense_w.row(i);
    for (int j = 0; j < d_w; ++j) {
      grow[static_cast<std::size_t>(j)] += g * cache->mean_vec[static_cast<std::size_t>(j)];
      d_mean[static_cast<std::size_t>(j)] += static_cast<double>(g) * wrow[static_cast<std::size_t>(j)];
    }
  }
  // Mean layer spreads gradient equally over the participating rows.
  const float inv_len = 1.0f / static_cast<float>(cache->tokens.size());
  for (int t : cache->tokens) {
    auto grow = grads.word_emb.row(t);
    for (int j = 0; j < d_w; ++j) {
      grow[static_cast<std::size_t>(j)] += static_cast<float>(d_mean[static_cast<std::size_t>(j)]) * inv_len;
    }
  }
}

void cnn_backward(const CnnParams& params, const EncoderOutput& out,
                  std::span<const float> upstream, CnnParams& grads) {
  const auto* cache = std::get_if<CnnCache>(&out.cache);
  if (cache == nullptr) throw Error(ErrorCode::State, "cnn_backward: cache is not from cnn_forward");
  const int s = params.filter_size;
  const int d_w = params.word_emb.cols;
  const int n_f = params.filters.rows;
  if (static_cast<int>(upstream.size()) != n_f || static_cast<int>(cache->argmax.size()) != n_f ||
      !grads.filters.same_shape(params.filters) || !grads.word_emb.same_shape(params.word_emb)) {
    throw Error(ErrorCode::State, "cnn_backward: cache/params shape mismatch");
  }

  for (int f = 0; f < n_f; ++f) {
    // Max pooling routes the gradient to the argmax window only; the
    // Relu gate closes it when the winning pre-activation was negative.
    if (cache->best_pre_act[static_cast<std::size_t>(f)] <= 0.0f) continue;
    const float g = upstream[static_cast<std::size_t>(f)];
    if (g == 0.0f) continue;
    grads.filter_bias.at(0, f) += g;
    const int pos = cache->argmax[static_cast<std::size_t>(f)];
    const auto filter = params.filters.row(f);
    auto gfilter = grads.filters.row(f);
    for (int u = 0; u < s; ++u) {
      const int token = cache->tokens[static_cast<std::size_t>(pos + u)];
      const auto word = params.word_emb.row(token);
      for (int j = 0; j < d_w; ++j) {
        gfilter[static_cast<std::size_t>(u) * d_w + static_cast<std::size_t>(j)] +=
            g * word[static_cast<std::size_t>(j)];
      }
      if (token == Vocabulary::kPadId) continue;  // padding row stays frozen
      auto gword = grads.word_emb.row(token);
      for (int j = 0; j < d_w; ++j) {
        gword[static_cast<std::size_t>(j)] +=
            g * filter[static_cast<std::size_t>(u) * d_w + static_cast<std::size_t>(j)];
      }
    }
  }
}

int encoder_output_dim(const EncoderVariant& encoder) {
  return std::visit(
      [](const auto& p) -> int {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, MovParams>) {
          return p.dense_w.rows;
        } else {
          return p.filters.rows;
        }
      },
      encoder);
}

EncoderOutput encoder_forward(const EncoderVariant& encoder, std::span<const int> tokens) {
  return std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, MovParams>) {
          return mov_forward(p, tokens);
        } else {
          return cnn_forward(p, tokens);
        }
      },
      encoder);
}

void encoder_backward(const EncoderVariant& encoder, const EncoderOutput& out,
                      std::span<const float> upstream, EncoderVariant& grads) {
  if (encoder.index() != grads.index()) {
    throw Error(ErrorCode::State, "encoder_backward: gradient buffers for a different encoder kind");
  }
  if (const auto* mov = std::get_if<MovParams>(&encoder)) {
    mov_backward(*mov, out, upstream, std::get<MovParams>(grads));
  } else {
    cnn_backward(std::get<CnnParams>(encoder), out, upstream, std::get<CnnParams>(grads));
  }
}

}  // namespace ter
