#include "ter/model.hpp"

#include <cmath>

#include "ter/error.hpp"

namespace ter {

ModelMode model_mode_from_string(const std::string& s) {
  if (s == "ter") return ModelMode::Ter;
  if (s == "ter+") return ModelMode::TerPlus;
  throw Error(ErrorCode::Config, "unknown mode '" + s + "' (expected 'ter' or 'ter+')");
}

std::string to_string(ModelMode mode) {
  return mode == ModelMode::Ter ? "ter" : "ter+";
}

CombineResult combine_masked(const JointModelParams& params, std::span<const float> h1,
                             std::span<const float> h2, std::span<const float> h2_mask) {
  if (params.mode != ModelMode::TerPlus) {
    throw Error(ErrorCode::State, "combine: model is in supervised-only mode");
  }
  if (static_cast<std::size_t>(params.comb_w.cols) != h1.size() + h2.size()) {
    throw Error(ErrorCode::Shape,
                "combine: layer expects " + std::to_string(params.comb_w.cols) +
                    " inputs, got " + std::to_string(h1.size() + h2.size()));
  }
  if (!h2_mask.empty() && h2_mask.size() != h2.size()) {
    throw Error(ErrorCode::Shape, "combine: mask length does not match h2");
  }
  CombineResult result;
  result.cache.h1_dim = static_cast<int>(h1.size());
  result.cache.concat.reserve(h1.size() + h2.size());
  result.cache.concat.assign(h1.begin(), h1.end());
  for (std::size_t j = 0; j < h2.size(); ++j) {
    result.cache.concat.push_back(h2_mask.empty() ? h2[j] : h2[j] * h2_mask[j]);
  }
  auto pre = matvec(params.comb_w, result.cache.concat);
  for (std::size_t j = 0; j < pre.size(); ++j) pre[j] += params.comb_b.at(0, static_cast<int>(j));
  result.vec = relu(pre);
  result.cache.pre_act = std::move(pre);
  return result;
}

CombineResult combine(const JointModelParams& params, std::span<const float> h1,
                      std::span<const float> h2, bool training, SeededRng& rng) {
  if (training) {
    const auto mask = dropout_mask(static_cast<int>(h2.size()), params.dropout_rate, rng);
    return combine_masked(params, h1, h2, mask);
  }
  return combine_masked(params, h1, h2, {});
}

double score(const JointModelParams& params, int user, std::span<const float> item_vec) {
  if (user < 0 || user >= params.user_emb.rows) {
    throw Error(ErrorCode::Data, "score: unknown user index " + std::to_string(user) + " (have " +
                                     std::to_string(params.user_emb.rows) + " users)");
  }
  if (static_cast<std::size_t>(params.user_emb.cols) != item_vec.size()) {
    throw Error(ErrorCode::Shape, "score: user dim " + std::to_string(params.user_emb.cols) +
                                      " vs item dim " + std::to_string(item_vec.size()));
  }
  const auto u = params.user_emb.row(user);
  double acc = 0.0;
  for (std::size_t j = 0; j < item_vec.size(); ++j) acc += static_cast<double>(u[j]) * item_vec[j];
  return acc;
}

TripletLossReport triplet_loss(const JointModelParams& params, int user,
                               std::span<const float> pos_vec, std::span<const float> neg_vec) {
  TripletLossReport report;
  report.s_ip = score(params, user, pos_vec);
  report.s_in = score(params, user, neg_vec);
  report.loss = softplus(-(report.s_ip - report.s_in));
  return report;
}

namespace {

// Backward through one item branch: item dropout, then (joint mode) the
// combination layer; returns dL/dh1 for the encoder.
std::vector<float> branch_backward(const JointModelParams& params, std::span<const float> d_item,
                                   const std::vector<float>& item_mask,
                                   const std::optional<CombineCache>& comb_cache,
                                   JointGrads& grads) {
  std::vector<float> d_vec(d_item.begin(), d_item.end());
  if (!item_mask.empty()) {
    for (std::size_t j = 0; j < d_vec.size(); ++j) d_vec[j] *= item_mask[j];
  }
  if (params.mode == ModelMode::Ter) return d_vec;

  if (!comb_cache.has_value()) {
    throw Error(ErrorCode::State, "triplet_backward: missing combination cache in joint mode");
  }
  const auto& cache = *comb_cache;
  const int k = params.comb_w.rows;
  const int in_dim = params.comb_w.cols;
  if (static_cast<int>(cache.concat.size()) != in_dim || static_cast<int>(d_vec.size()) != k ||
      !grads.comb_w.same_shape(params.comb_w)) {
    throw Error(ErrorCode::State, "triplet_backward: combination cache shape mismatch");
  }
  std::vector<double> d_concat(static_cast<std::size_t>(in_dim), 0.0);
  for (int i = 0; i < k; ++i) {
    const float g = cache.pre_act[static_cast<std::size_t>(i)] > 0.0f ? d_vec[static_cast<std::size_t>(i)] : 0.0f;
    if (g == 0.0f) continue;
    grads.comb_b.at(0, i) += g;
    auto wrow = params.comb_w.row(i);
    auto grow = grads.comb_w.row(i);
    for (int j = 0; j < in_dim; ++j) {
      grow[static_cast<std::size_t>(j)] += g * cache.concat[static_cast<std::size_t>(j)];
      d_concat[static_cast<std::size_t>(j)] += static_cast<double>(g) * wrow[static_cast<std::size_t>(j)];
    }
  }
  // Only the h1 slice flows onward; the h2 slice would feed the frozen
  // pre-trained matrix.
  std::vector<float> dh1(static_cast<std::size_t>(cache.h1_dim));
  for (int j = 0; j < cache.h1_dim; ++j) {
    dh1[static_cast<std::size_t>(j)] = static_cast<float>(d_concat[static_cast<std::size_t>(j)]);
  }
  return dh1;
}

}  // namespace

TripletBackward triplet_backward(const JointModelParams& params, const TripletContext& ctx,
                                 JointGrads& grads) {
  if (!grads.user_emb.same_shape(params.user_emb)) {
    throw Error(ErrorCode::State, "triplet_backward: gradient buffer shape mismatch");
  }
  const int k = params.user_emb.cols;
  if (static_cast<int>(ctx.item_vec_pos.size()) != k || static_cast<int>(ctx.item_vec_neg.size()) != k) {
    throw Error(ErrorCode::State, "triplet_backward: item vector dim mismatch");
  }

  const double weight = sigmoid(-ctx.margin);  // -dL/dmargin

  // dL/dU_i = sigmoid(-margin) * (v_n - v_p)
  auto gu = grads.user_emb.row(ctx.user);
  for (int j = 0; j < k; ++j) {
    gu[static_cast<std::size_t>(j)] += static_cast<float>(
        weight * (ctx.item_vec_neg[static_cast<std::size_t>(j)] - ctx.item_vec_pos[static_cast<std::size_t>(j)]));
  }

  const auto u = params.user_emb.row(ctx.user);
  std::vector<float> d_pos(static_cast<std::size_t>(k));
  std::vector<float> d_neg(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    d_pos[static_cast<std::size_t>(j)] = static_cast<float>(-weight * u[static_cast<std::size_t>(j)]);
    d_neg[static_cast<std::size_t>(j)] = static_cast<float>(weight * u[static_cast<std::size_t>(j)]);
  }

  TripletBackward out;
  out.dh1_pos = branch_backward(params, d_pos, ctx.item_mask_pos, ctx.comb_pos, grads);
  out.dh1_neg = branch_backward(params, d_neg, ctx.item_mask_neg, ctx.comb_neg, grads);
  return out;
}

}  // namespace ter
