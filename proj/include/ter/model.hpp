#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ter/numkit.hpp"

namespace ter {

enum class ModelMode { Ter, TerPlus };

ModelMode model_mode_from_string(const std::string& s);
std::string to_string(ModelMode mode);

/// User embeddings plus, in joint mode, the combination layer fusing the
/// supervised embedding h1 with the frozen pre-trained vector h2.
/// In supervised-only mode the combination matrices are empty and the
/// encoder output passes through unchanged.
struct JointModelParams {
  DenseMatrix user_emb;  // n_users x k
  DenseMatrix comb_w;    // k x (k_enc + d_pv), joint mode only
  DenseMatrix comb_b;    // 1 x k, joint mode only
  ModelMode mode = ModelMode::Ter;
  float dropout_rate = 0.3f;  // dropout on h2 during training
};

struct CombineCache {
  std::vector<float> concat;  // [h1, h2 after mask]
  std::vector<float> pre_act;
  int h1_dim = 0;
};

struct CombineResult {
  std::vector<float> vec;
  CombineCache cache;
};

/// Relu(W_g . [h1, dropout(h2)] + b_g). The mask is sampled only when
/// `training` is set; evaluation uses h2 unchanged.
CombineResult combine(const JointModelParams& params, std::span<const float> h1,
                      std::span<const float> h2, bool training, SeededRng& rng);

/// Same computation with a caller-supplied mask over h2 (empty = none).
CombineResult combine_masked(const JointModelParams& params, std::span<const float> h1,
                             std::span<const float> h2, std::span<const float> h2_mask);

/// Dot product between the user embedding and an item vector.
double score(const JointModelParams& params, int user, std::span<const float> item_vec);

struct TripletLossReport {
  double s_ip = 0.0;
  double s_in = 0.0;
  double loss = 0.0;
};

/// Pairwise ranking loss -log sigmoid(s_ip - s_in), computed through a
/// stable softplus.
TripletLossReport triplet_loss(const JointModelParams& params, int user,
                               std::span<const float> pos_vec, std::span<const float> neg_vec);

/// Everything one training triplet needs for the backward pass. Item
/// vectors are post-combination and post item-dropout; the masks record
/// exactly what the forward pass sampled.
struct TripletContext {
  int user = 0;
  double margin = 0.0;
  std::vector<float> item_vec_pos;
  std::vector<float> item_vec_neg;
  std::vector<float> item_mask_pos;  // empty when no item dropout was applied
  std::vector<float> item_mask_neg;
  std::optional<CombineCache> comb_pos;  // joint mode only
  std::optional<CombineCache> comb_neg;
};

struct JointGrads {
  DenseMatrix user_emb;
  DenseMatrix comb_w;
  DenseMatrix comb_b;
};

struct TripletBackward {
  std::vector<float> dh1_pos;
  std::vector<float> dh1_neg;
};

/// Chain rule through score, item dropout and the combination layer (the
/// pre-trained matrix is frozen and receives no gradient). Returns the
/// upstream gradients for the two encoder backward passes.
TripletBackward triplet_backward(const JointModelParams& params, const TripletContext& ctx,
                                 JointGrads& grads);

}  // namespace ter
