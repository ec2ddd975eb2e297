#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ter/corpus.hpp"
#include "ter/numkit.hpp"

namespace ter {

struct PvConfig {
  int dim = 50;
  int window = 5;
  int negatives = 5;
  int epochs = 10;
  float lr_start = 0.025f;
  float lr_end = 1e-4f;
};

/// Paragraph Vector (distributed-memory) parameters. Input and output
/// word matrices are separate storage; the doc matrix has one row per
/// corpus document.
struct PvParams {
  DenseMatrix doc_emb;   // n_docs x dim
  DenseMatrix word_in;   // V x dim
  DenseMatrix word_out;  // V x dim, zero-initialized
  int window = 5;
  int negatives = 5;
};

/// Mean of the document vector and the input word vectors within
/// +-window of `position` (target excluded); boundary neighbors simply
/// shrink the set.
std::vector<float> pv_context(const PvParams& params, const TextItem& doc, int doc_row,
                              int position);

/// One training example with its sampled negatives held fixed, so loss
/// and gradients are pure functions of the parameters.
struct PvExample {
  int doc_row = 0;
  int position = 0;
  std::vector<int> negatives;
};

/// Negative-sampling logistic loss of one example.
double pv_example_loss(const PvParams& params, const TextItem& doc, const PvExample& ex);

/// Analytic gradients of pv_example_loss (for checking and for the SGD
/// step). grad_context applies to the doc row and every context word
/// row, already divided by the context set size.
struct PvGrads {
  std::vector<float> grad_context;
  std::vector<std::pair<int, std::vector<float>>> grad_out_rows;
  double loss = 0.0;
};
PvGrads pv_example_grads(const PvParams& params, const TextItem& doc, const PvExample& ex);

/// Unigram^exponent negative-sampling table over vocabulary ids with
/// nonzero frequency (padding excluded).
class PvNegativeTable {
 public:
  PvNegativeTable(const Vocabulary& vocab, double exponent);
  int draw(SeededRng& rng, int exclude) const;  // -1 when nothing but `exclude` has mass

 private:
  std::vector<double> cumulative_;
  std::vector<int> ids_;
};

/// Draws negatives, applies one SGD step to the doc vector, the context
/// input vectors and the touched output vectors; returns the loss at the
/// pre-update parameters.
double pv_sgd_step(PvParams& params, const TextItem& doc, int doc_row, int position, float lr,
                   const PvNegativeTable& table, SeededRng& rng);

/// Pre-trained document matrix keyed by item id; lookups for ids that
/// were not pre-trained fail.
class PretrainedMatrix {
 public:
  PretrainedMatrix() = default;
  PretrainedMatrix(DenseMatrix m, std::vector<std::string> ids);

  int dim() const { return matrix_.cols; }
  int n_docs() const { return matrix_.rows; }
  bool contains(std::string_view id) const;
  std::span<const float> row(std::string_view id) const;
  const DenseMatrix& matrix() const { return matrix_; }
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  DenseMatrix matrix_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, int> row_of_;
};

struct PretrainResult {
  PretrainedMatrix matrix;
  std::vector<double> epoch_mean_loss;
  std::int64_t skipped_empty_docs = 0;
};

/// Runs epochs x every token position of pv_sgd_step over the corpus
/// with a linearly decaying learning rate. Interaction data never enters
/// here; the corpus is text only.
PretrainResult pretrain(std::span<const TextItem> docs, const Vocabulary& vocab,
                        const PvConfig& config, SeededRng rng);

}  // namespace ter
