#include "ter/pvec.hpp"

#include <algorithm>
#include <cmath>

#include "ter/error.hpp"

namespace ter {
namespace {

// Context rows: the doc vector plus in-window input word vectors.
std::vector<int> context_word_positions(const TextItem& doc, int position, int window) {
  std::vector<int> out;
  const int len = static_cast<int>(doc.tokens.size());
  const int lo = std::max(0, position - window);
  const int hi = std::min(len - 1, position + window);
  for (int i = lo; i <= hi; ++i) {
    if (i != position) out.push_back(i);
  }
  return out;
}

}  // namespace

std::vector<float> pv_context(const PvParams& params, const TextItem& doc, int doc_row,
                              int position) {
  if (position < 0 || position >= static_cast<int>(doc.tokens.size())) {
    throw Error(ErrorCode::Arg, "pv_context: position out of range");
  }
  const int dim = params.doc_emb.cols;
  std::vector<double> acc(static_cast<std::size_t>(dim), 0.0);
  const auto doc_vec = params.doc_emb.row(doc_row);
  for (int j = 0; j < dim; ++j) acc[static_cast<std::size_t>(j)] = doc_vec[static_cast<std::size_t>(j)];
  const auto neighbors = context_word_positions(doc, position, params.window);
  for (int i : neighbors) {
    const auto w = params.word_in.row(doc.tokens[static_cast<std::size_t>(i)]);
    for (int j = 0; j < dim; ++j) acc[static_cast<std::size_t>(j)] += w[static_cast<std::size_t>(j)];
  }
  const double inv = 1.0 / static_cast<double>(1 + neighbors.size());
  std::vector<float> out(static_cast<std::size_t>(dim));
  for (int j = 0; j < dim; ++j) out[static_cast<std::size_t>(j)] = static_cast<float>(acc[static_cast<std::size_t>(j)] * inv);
  return out;
}

double pv_example_loss(const PvParams& params, const TextItem& doc, const PvExample& ex) {
  const auto c = pv_context(params, doc, ex.doc_row, ex.position);
  const int target = doc.tokens[static_cast<std::size_t>(ex.position)];
  const int dim = params.doc_emb.cols;
  auto dot = [&](int word) {
    const auto o = params.word_out.row(word);
    double acc = 0.0;
    for (int j = 0; j < dim; ++j) acc += static_cast<double>(c[static_cast<std::size_t>(j)]) * o[static_cast<std::size_t>(j)];
    return acc;
  };
  double loss = softplus(-dot(target));
  for (int neg : ex.negatives) loss += softplus(dot(neg));
  return loss;
}

PvGrads pv_example_grads(const PvParams& params, const TextItem& doc, const PvExample& ex) {
  const auto c = pv_context(params, doc, ex.doc_row, ex.position);
  const int target = doc.tokens[static_cast<std::size_t>(ex.position)];
  const int dim = params.doc_emb.cols;
  const int context_size = 1 + static_cast<int>(context_word_positions(doc, ex.position, params.window).size());

  PvGrads grads;
  grads.grad_context.assign(static_cast<std::size_t>(dim), 0.0f);
  std::vector<double> d_c(static_cast<std::size_t>(dim), 0.0);

  auto accumulate = [&](int word, double label) {
    const auto o = params.word_out.row(word);
    double score = 0.0;
    for (int j = 0; j < dim; ++j) score += static_cast<double>(c[static_cast<std::size_t>(j)]) * o[static_cast<std::size_t>(j)];
    grads.loss += label > 0.5 ? softplus(-score) : softplus(score);
    const double err = sigmoid(score) - label;  // d loss / d score
    std::vector<float> d_out(static_cast<std::size_t>(dim));
    for (int j = 0; j < dim; ++j) {
      d_out[static_cast<std::size_t>(j)] = static_cast<float>(err * c[static_cast<std::size_t>(j)]);
      d_c[static_cast<std::size_t>(j)] += err * o[static_cast<std::size_t>(j)];
    }
    grads.grad_out_rows.emplace_back(word, std::move(d_out));
  };

  accumulate(target, 1.0);
  for (int neg : ex.negatives) accumulate(neg, 0.0);

  // The context is a mean, so each contributing row gets 1/|context|.
  const double inv = 1.0 / static_cast<double>(context_size);
  for (int j = 0; j < dim; ++j) {
    grads.grad_context[static_cast<std::size_t>(j)] = static_cast<float>(d_c[static_cast<std::size_t>(j)] * inv);
  }
  return grads;
}

PvNegativeTable::PvNegativeTable(const Vocabulary& vocab, double exponent) {
  double total = 0.0;
  for (int id = Vocabulary::kUnkId; id < vocab.size(); ++id) {
    const auto f = vocab.freq(id);
    if (f <= 0) continue;
    total += std::pow(static_cast<double>(f), exponent);
    ids_.push_back(id);
    cumulative_.push_back(total);
  }
  if (ids_.empty()) throw Error(ErrorCode::Data, "negative table: vocabulary has no counted tokens");
}

int PvNegativeTable::draw(SeededRng& rng, int exclude) const {
  for (int attempt = 0; attempt < 10; ++attempt) {
    const double u = rng.next_unit() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const auto idx = static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        it - cumulative_.begin(), static_cast<std::ptrdiff_t>(ids_.size()) - 1));
    if (ids_[idx] != exclude) return ids_[idx];
  }
  return -1;
}

double pv_sgd_step(PvParams& params, const TextItem& doc, int doc_row, int position, float lr,
                   const PvNegativeTable& table, SeededRng& rng) {
  PvExample ex{doc_row, position, {}};
  const int target = doc.tokens[static_cast<std::size_t>(position)];
  for (int i = 0; i < params.negatives; ++i) {
    const int neg = table.draw(rng, target);
    if (neg >= 0) ex.negatives.push_back(neg);
  }

  const auto grads = pv_example_grads(params, doc, ex);
  const int dim = params.doc_emb.cols;

  for (const auto& [word, d_out] : grads.grad_out_rows) {
    auto row = params.word_out.row(word);
    for (int j = 0; j < dim; ++j) row[static_cast<std::size_t>(j)] -= lr * d_out[static_cast<std::size_t>(j)];
  }
  auto doc_vec = params.doc_emb.row(doc_row);
  for (int j = 0; j < dim; ++j) doc_vec[static_cast<std::size_t>(j)] -= lr * grads.grad_context[static_cast<std::size_t>(j)];
  for (int i : context_word_positions(doc, position, params.window)) {
    auto row = params.word_in.row(doc.tokens[static_cast<std::size_t>(i)]);
    for (int j = 0; j < dim; ++j) row[static_cast<std::size_t>(j)] -= lr * grads.grad_context[static_cast<std::size_t>(j)];
  }
  return grads.loss;
}

PretrainedMatrix::PretrainedMatrix(DenseMatrix m, std::vector<std::string> ids)
    : matrix_(std::move(m)), ids_(std::move(ids)) {
  if (static_cast<int>(ids_.size()) != matrix_.rows) {
    throw Error(ErrorCode::Shape, "pretrained matrix: one row per document id required");
  }
  for (int i = 0; i < matrix_.rows; ++i) row_of_.emplace(ids_[static_cast<std::size_t>(i)], i);
}

bool PretrainedMatrix::contains(std::string_view id) const {
  return row_of_.contains(std::string(id));
}

std::span<const float> PretrainedMatrix::row(std::string_view id) const {
  auto it = row_of_.find(std::string(id));
  if (it == row_of_.end()) {
    throw Error(ErrorCode::Data, "pretrained matrix: no row for item '" + std::string(id) + "'");
  }
  return matrix_.row(it->second);
}

PretrainResult pretrain(std::span<const TextItem> docs, const Vocabulary& vocab,
                        const PvConfig& config, SeededRng rng) {
  if (docs.empty()) throw Error(ErrorCode::Data, "pretrain: empty corpus");

  PvParams params;
  params.window = config.window;
  params.negatives = config.negatives;
  auto doc_rng = rng.split("pv.init.doc");
  auto word_rng = rng.split("pv.init.word");
  params.doc_emb = init_uniform(static_cast<int>(docs.size()), config.dim, 0.05f, doc_rng);
  params.word_in = init_uniform(vocab.size(), config.dim, 0.05f, word_rng);
  params.word_out = DenseMatrix(vocab.size(), config.dim);

  PvNegativeTable table(vocab, 0.75);
  auto draw_rng = rng.split("pv.negatives");

  std::int64_t total_positions = 0;
  PretrainResult result;
  for (const auto& doc : docs) {
    if (doc.tokens.empty()) {
      result.skipped_empty_docs += 1;
    } else {
      total_positions += static_cast<std::int64_t>(doc.tokens.size());
    }
  }
  if (total_positions == 0) throw Error(ErrorCode::Data, "pretrain: all documents are empty");

  const std::int64_t total_steps = total_positions * config.epochs;
  std::int64_t step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    std::int64_t epoch_examples = 0;
    for (int d = 0; d < static_cast<int>(docs.size()); ++d) {
      const auto& doc = docs[static_cast<std::size_t>(d)];
      if (doc.tokens.empty()) continue;
      for (int pos = 0; pos < static_cast<int>(doc.tokens.size()); ++pos) {
        const float lr = static_cast<float>(
            config.lr_start +
            (static_cast<double>(config.lr_end) - config.lr_start) *
                (static_cast<double>(step) / static_cast<double>(total_steps)));
        epoch_loss += pv_sgd_step(params, doc, d, pos, lr, table, draw_rng);
        ++epoch_examples;
        ++step;
      }
    }
    result.epoch_mean_loss.push_back(epoch_loss / static_cast<double>(epoch_examples));
  }

  std::vector<std::string> ids;
  ids.reserve(docs.size());
  for (const auto& doc : docs) ids.push_back(doc.id);
  result.matrix = PretrainedMatrix(std::move(params.doc_emb), std::move(ids));
  return result;
}

}  // namespace ter
