#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ter/corpus.hpp"
#include "ter/encoder.hpp"
#include "ter/model.hpp"
#include "ter/pvec.hpp"

namespace ter {

enum class EncoderKind { Mov, Cnn };

EncoderKind encoder_kind_from_string(const std::string& s);
std::string to_string(EncoderKind kind);

struct TrainConfig {
  int epochs = 30;
  int batch_size = 64;
  float learning_rate = 1e-3f;
  float weight_decay = 1e-5f;     // L2 on user embeddings
  float dropout_item = 0.1f;      // on the final item vector
  float dropout_pretrained = 0.3f;  // on h2 inside the combination
  EncoderKind encoder = EncoderKind::Mov;
  ModelMode mode = ModelMode::Ter;
  std::uint64_t seed = 42;
  double negative_exponent = 1.0;
  // Dimensions.
  int embedding_dim = 50;  // user embedding and final item vector
  int word_dim = 50;
  int cnn_filters = 50;
  int cnn_filter_size = 3;
};

struct TrainResult {
  std::vector<double> epoch_mean_loss;
};

/// Draws (interaction count) triplets per epoch, accumulates minibatch
/// gradients and applies one Adam step per tensor. The sampling streams
/// restart identically at each epoch, so with a zero learning rate the
/// loss trace is constant. In joint mode `pretrained` must cover every
/// catalog item. Aborts on a non-finite loss.
TrainResult train(const ItemCatalog& catalog, const InteractionSet& interactions,
                  EncoderVariant& encoder, JointModelParams& model,
                  const PretrainedMatrix* pretrained, const TrainConfig& config);

/// Fresh parameter initialization (seed-deterministic) followed by train().
struct TrainedModel {
  EncoderVariant encoder;
  JointModelParams model;
  TrainResult trace;
};
TrainedModel run_training(const ItemCatalog& catalog, const InteractionSet& interactions,
                          const PretrainedMatrix* pretrained, const TrainConfig& config,
                          int vocab_size);

EncoderVariant init_encoder(const TrainConfig& config, int vocab_size, SeededRng base);
JointModelParams init_model(const TrainConfig& config, int n_users, int encoder_dim, int pv_dim,
                            SeededRng base);

/// One held-out interaction with its sampled negatives.
struct CandidateSet {
  int user = 0;
  int positive = 0;
  std::vector<int> negatives;
};

/// One candidate set per held-out interaction: the positive plus n_neg
/// distinct test-pool items drawn uniformly, excluding every test item
/// the user interacted with.
std::vector<CandidateSet> build_candidate_sets(const InteractionSet& interactions, int n_neg,
                                               SeededRng rng);

struct UserEval {
  int user = 0;
  double ap = 0.0;
  double auc = 0.0;
  int n_sets = 0;
};

struct EvalReport {
  double map = 0.0;
  double auc = 0.0;
  int n_users = 0;
  int n_candidate_sets = 0;
  std::vector<UserEval> per_user;
};

using ScoreFn = std::function<double(int user, int item)>;

/// AP = 1/rank of the positive under descending score (ties broken by
/// ascending item id); AUC counts negatives strictly below the positive
/// plus half the ties. Per-user means are averaged into the report.
EvalReport evaluate(const ScoreFn& scorer, std::span<const CandidateSet> sets,
                    const ItemCatalog& catalog);

/// Precomputed evaluation-mode item vectors (no dropout anywhere).
class ItemScorer {
 public:
  ItemScorer(const ItemCatalog& catalog, const EncoderVariant& encoder,
             const JointModelParams& model, const PretrainedMatrix* pretrained);

  double operator()(int user, int item) const;
  std::span<const float> item_vector(int item) const { return vectors_.row(item); }

 private:
  const JointModelParams& model_;
  DenseMatrix vectors_;  // n_items x k
};

struct SweepPoint {
  double rate = 0.0;
  double map = 0.0;
};

/// Retrains from the same seed at every dropout rate and reports MAP on
/// the held-out split.
std::vector<SweepPoint> dropout_sweep(const ItemCatalog& catalog,
                                      const InteractionSet& interactions,
                                      const PretrainedMatrix& pretrained, TrainConfig config,
                                      std::span<const double> rates, int eval_negatives,
                                      int vocab_size);

}  // namespace ter
