#include "ter/trainkit.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ter/error.hpp"

namespace ter {

EncoderKind encoder_kind_from_string(const std::string& s) {
  if (s == "mov") return EncoderKind::Mov;
  if (s == "cnn") return EncoderKind::Cnn;
  throw Error(ErrorCode::Config, "unknown encoder '" + s + "' (expected 'mov' or 'cnn')");
}

std::string to_string(EncoderKind kind) {
  return kind == EncoderKind::Mov ? "mov" : "cnn";
}

namespace {

constexpr float kInitScale = 0.05f;

struct TensorBinding {
  DenseMatrix* param;
  DenseMatrix* grad;
  AdamState state;
};

void validate_config(const TrainConfig& c) {
  auto in_unit = [](float v) { return v >= 0.0f && v <= 1.0f; };
  if (c.batch_size < 1) throw Error(ErrorCode::Config, "batch_size must be >= 1");
  if (c.epochs < 0) throw Error(ErrorCode::Config, "epochs must be >= 0");
  if (!in_unit(c.dropout_item) || !in_unit(c.dropout_pretrained)) {
    throw Error(ErrorCode::Config, "dropout rates must be in [0, 1]");
  }
  if (c.learning_rate < 0.0f || c.weight_decay < 0.0f) {
    throw Error(ErrorCode::Config, "learning_rate and weight_decay must be >= 0");
  }
  if (c.embedding_dim < 1 || c.word_dim < 1 || c.cnn_filters < 1 || c.cnn_filter_size < 1) {
    throw Error(ErrorCode::Config, "dimensions must be >= 1");
  }
}

}  // namespace

EncoderVariant init_encoder(const TrainConfig& config, int vocab_size, SeededRng base) {
  if (config.encoder == EncoderKind::Mov) {
    MovParams p;
    auto emb_rng = base.split("init.enc.word_emb");
    auto w_rng = base.split("init.enc.dense_w");
    auto b_rng = base.split("init.enc.dense_b");
    p.word_emb = init_uniform(vocab_size, config.word_dim, kInitScale, emb_rng);
    std::fill(p.word_emb.row(Vocabulary::kPadId).begin(), p.word_emb.row(Vocabulary::kPadId).end(), 0.0f);
    p.dense_w = init_uniform(config.embedding_dim, config.word_dim, kInitScale, w_rng);
    p.dense_b = init_uniform(1, config.embedding_dim, kInitScale, b_rng);
    return p;
  }
  CnnParams p;
  auto emb_rng = base.split("init.enc.word_emb");
  auto f_rng = base.split("init.enc.filters");
  auto b_rng = base.split("init.enc.filter_bias");
  p.word_emb = init_uniform(vocab_size, config.word_dim, kInitScale, emb_rng);
  std::fill(p.word_emb.row(Vocabulary::kPadId).begin(), p.word_emb.row(Vocabulary::kPadId).end(), 0.0f);
  p.filters = init_uniform(config.cnn_filters, config.cnn_filter_size * config.word_dim, kInitScale, f_rng);
  p.filter_bias = init_uniform(1, config.cnn_filters, kInitScale, b_rng);
  p.filter_size = config.cnn_filter_size;
  return p;
}

JointModelParams init_model(const TrainConfig& config, int n_users, int encoder_dim, int pv_dim,
                            SeededRng base) {
  JointModelParams m;
  m.mode = config.mode;
  m.dropout_rate = config.dropout_pretrained;
  auto u_rng = base.split("init.joint.user_emb");
  m.user_emb = init_uniform(n_users, config.embedding_dim, kInitScale, u_rng);
  if (config.mode == ModelMode::TerPlus) {
    auto w_rng = base.split("init.joint.comb_w");
    auto b_rng = base.split("init.joint.comb_b");
    m.comb_w = init_uniform(config.embedding_dim, encoder_dim + pv_dim, kInitScale, w_rng);
    m.comb_b = init_uniform(1, config.embedding_dim, kInitScale, b_rng);
  }
  return m;
}

TrainResult train(const ItemCatalog& catalog, const InteractionSet& interactions,
                  EncoderVariant& encoder, JointModelParams& model,
                  const PretrainedMatrix* pretrained, const TrainConfig& config) {
  validate_config(config);
  const int k = model.user_emb.cols;
  const int enc_dim = encoder_output_dim(encoder);
  if (model.mode == ModelMode::Ter) {
    if (enc_dim != k) {
      throw Error(ErrorCode::Config, "supervised-only mode needs encoder output dim " +
                                         std::to_string(k) + ", got " + std::to_string(enc_dim));
    }
  } else {
    if (pretrained == nullptr) {
      throw Error(ErrorCode::Config, "joint mode requires a pre-trained embedding matrix");
    }
    if (model.comb_w.rows != k || model.comb_w.cols != enc_dim + pretrained->dim()) {
      throw Error(ErrorCode::Shape, "combination layer shape does not match encoder/pretrained dims");
    }
    for (const auto& item : catalog.items()) {
      if (!pretrained->contains(item.id)) {
        throw Error(ErrorCode::Data, "pre-trained matrix has no row for item '" + item.id + "'");
      }
    }
  }

  // Tensor registry driving the per-batch Adam updates.
  EncoderVariant enc_grads = encoder;
  JointGrads joint_grads;
  joint_grads.user_emb = DenseMatrix(model.user_emb.rows, model.user_emb.cols);
  joint_grads.comb_w = DenseMatrix(model.comb_w.rows, model.comb_w.cols);
  joint_grads.comb_b = DenseMatrix(model.comb_b.rows, model.comb_b.cols);

  std::vector<TensorBinding> tensors;
  auto bind = [&](const std::string& name, DenseMatrix* param, DenseMatrix* grad) {
    grad->fill(0.0f);
    tensors.push_back({param, grad, AdamState(name, param->rows, param->cols, config.learning_rate)});
  };
  if (auto* mov = std::get_if<MovParams>(&encoder)) {
    auto& g = std::get<MovParams>(enc_grads);
    bind("enc.word_emb", &mov->word_emb, &g.word_emb);
    bind("enc.dense_w", &mov->dense_w, &g.dense_w);
    bind("enc.dense_b", &mov->dense_b, &g.dense_b);
  } else {
    auto* cnn = std::get_if<CnnParams>(&encoder);
    auto& g = std::get<CnnParams>(enc_grads);
    bind("enc.word_emb", &cnn->word_emb, &g.word_emb);
    bind("enc.filters", &cnn->filters, &g.filters);
    bind("enc.filter_bias", &cnn->filter_bias, &g.filter_bias);
  }
  bind("joint.user_emb", &model.user_emb, &joint_grads.user_emb);
  if (model.mode == ModelMode::TerPlus) {
    bind("joint.comb_w", &model.comb_w, &joint_grads.comb_w);
    bind("joint.comb_b", &model.comb_b, &joint_grads.comb_b);
  }

  const SeededRng base(config.seed);
  const auto n_triplets = static_cast<std::int64_t>(interactions.train_pairs().size());

  TrainResult result;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Streams restart identically every epoch (zero-step fixed point:
    // lr = 0 reproduces the exact same loss trace).
    TripletSampler sampler(interactions, config.negative_exponent, base.split("sampling"));
    auto mask_rng = base.split("masks");

    double epoch_loss = 0.0;
    std::int64_t done = 0;
    int batch_index = 0;
    while (done < n_triplets) {
      const auto batch_n = static_cast<int>(std::min<std::int64_t>(config.batch_size, n_triplets - done));
      double batch_loss = 0.0;
      for (int b = 0; b < batch_n; ++b) {
        const auto triplet = sampler.sample();

        TripletContext ctx;
        ctx.user = triplet.user;

        auto forward_item = [&](int item_index, std::vector<float>& vec_out,
                                std::vector<float>& mask_out, std::optional<CombineCache>& comb_out)
            -> EncoderOutput {
          const auto& item = catalog.item(item_index);
          auto enc_out = encoder_forward(encoder, item.tokens);
          std::vector<float> vec;
          if (model.mode == ModelMode::TerPlus) {
            auto combined = combine(model, enc_out.h1, pretrained->row(item.id), true, mask_rng);
            vec = std::move(combined.vec);
            comb_out = std::move(combined.cache);
          } else {
            vec = enc_out.h1;
          }
          if (config.dropout_item > 0.0f) {
            mask_out = dropout_mask(static_cast<int>(vec.size()), config.dropout_item, mask_rng);
            for (std::size_t j = 0; j < vec.size(); ++j) vec[j] *= mask_out[j];
          }
          vec_out = std::move(vec);
          return enc_out;
        };

        auto enc_pos = forward_item(triplet.positive, ctx.item_vec_pos, ctx.item_mask_pos, ctx.comb_pos);
        auto enc_neg = forward_item(triplet.negative, ctx.item_vec_neg, ctx.item_mask_neg, ctx.comb_neg);

        const auto report = triplet_loss(model, ctx.user, ctx.item_vec_pos, ctx.item_vec_neg);
        ctx.margin = report.s_ip - report.s_in;
        batch_loss += report.loss;

        const auto upstream = triplet_backward(model, ctx, joint_grads);
        encoder_backward(encoder, enc_pos, upstream.dh1_pos, enc_grads);
        encoder_backward(encoder, enc_neg, upstream.dh1_neg, enc_grads);

        if (config.weight_decay > 0.0f) {
          auto gu = joint_grads.user_emb.row(ctx.user);
          const auto u = model.user_emb.row(ctx.user);
          for (int j = 0; j < k; ++j) gu[static_cast<std::size_t>(j)] += config.weight_decay * u[static_cast<std::size_t>(j)];
        }
      }

      if (!std::isfinite(batch_loss)) {
        throw Error(ErrorCode::Numeric, "non-finite loss at epoch " + std::to_string(epoch + 1) +
                                            ", batch " + std::to_string(batch_index + 1));
      }

      const float inv_batch = 1.0f / static_cast<float>(batch_n);
      for (auto& t : tensors) {
        for (auto& g : t.grad->data) g *= inv_batch;
        adam_step(*t.param, *t.grad, t.state);
        t.grad->fill(0.0f);
      }

      epoch_loss += batch_loss;
      done += batch_n;
      ++batch_index;
    }
    result.epoch_mean_loss.push_back(n_triplets > 0 ? epoch_loss / static_cast<double>(n_triplets) : 0.0);
  }
  return result;
}

TrainedModel run_training(const ItemCatalog& catalog, const InteractionSet& interactions,
                          const PretrainedMatrix* pretrained, const TrainConfig& config,
                          int vocab_size) {
  validate_config(config);
  if (vocab_size < 2) throw Error(ErrorCode::Arg, "run_training: vocab_size must be >= 2");

  const SeededRng base(config.seed);
  TrainedModel out;
  out.encoder = init_encoder(config, vocab_size, base);
  const int pv_dim = pretrained != nullptr ? pretrained->dim() : 0;
  out.model = init_model(config, interactions.n_users(), encoder_output_dim(out.encoder), pv_dim, base);
  out.trace = train(catalog, interactions, out.encoder, out.model, pretrained, config);
  return out;
}

std::vector<CandidateSet> build_candidate_sets(const InteractionSet& interactions, int n_neg,
                                               SeededRng rng) {
  const auto pool = interactions.test_item_indices();
  if (static_cast<int>(pool.size()) < n_neg + 1) {
    throw Error(ErrorCode::Data, "test pool has " + std::to_string(pool.size()) +
                                     " items; need at least " + std::to_string(n_neg + 1));
  }

  // Test-positive sets per user, to exclude from that user's negatives.
  std::vector<std::vector<int>> user_test_positives(static_cast<std::size_t>(interactions.n_users()));
  for (const auto& [user, item] : interactions.heldout_pairs()) {
    user_test_positives[static_cast<std::size_t>(user)].push_back(item);
  }
  for (auto& v : user_test_positives) std::sort(v.begin(), v.end());

  std::vector<CandidateSet> sets;
  sets.reserve(interactions.heldout_pairs().size());
  for (const auto& [user, item] : interactions.heldout_pairs()) {
    const auto& exclude = user_test_positives[static_cast<std::size_t>(user)];
    std::vector<int> candidates;
    candidates.reserve(pool.size());
    for (int p : pool) {
      if (!std::binary_search(exclude.begin(), exclude.end(), p)) candidates.push_back(p);
    }
    if (static_cast<int>(candidates.size()) < n_neg) {
      throw Error(ErrorCode::Data, "test pool too small for user index " + std::to_string(user) +
                                       ": only " + std::to_string(candidates.size()) +
                                       " eligible negatives");
    }
    CandidateSet set;
    set.user = user;
    set.positive = item;
    for (int i = 0; i < n_neg; ++i) {
      const auto j = static_cast<std::size_t>(i) + rng.next_below(candidates.size() - static_cast<std::size_t>(i));
      std::swap(candidates[static_cast<std::size_t>(i)], candidates[j]);
      set.negatives.push_back(candidates[static_cast<std::size_t>(i)]);
    }
    sets.push_back(std::move(set));
  }
  return sets;
}

EvalReport evaluate(const ScoreFn& scorer, std::span<const CandidateSet> sets,
                    const ItemCatalog& catalog) {
  std::map<int, UserEval> by_user;  // ordered for a deterministic mean
  for (const auto& set : sets) {
    const double s_pos = scorer(set.user, set.positive);
    const auto& pos_id = catalog.item(set.positive).id;
    int strictly_above = 0;
    int tied_above = 0;  // ties ranked above the positive via ascending id
    int strictly_below = 0;
    int ties = 0;
    for (int neg : set.negatives) {
      const double s = scorer(set.user, neg);
      if (s > s_pos) {
        ++strictly_above;
      } else if (s < s_pos) {
        ++strictly_below;
      } else {
        ++ties;
        if (catalog.item(neg).id < pos_id) ++tied_above;
      }
    }
    const int rank = 1 + strictly_above + tied_above;
    const double ap = 1.0 / static_cast<double>(rank);
    const double auc =
        (static_cast<double>(strictly_below) + 0.5 * ties) / static_cast<double>(set.negatives.size());

    auto& u = by_user[set.user];
    u.user = set.user;
    u.ap += ap;
    u.auc += auc;
    u.n_sets += 1;
  }

  EvalReport report;
  for (auto& [user, u] : by_user) {
    u.ap /= u.n_sets;
    u.auc /= u.n_sets;
    report.map += u.ap;
    report.auc += u.auc;
    report.n_candidate_sets += u.n_sets;
    report.per_user.push_back(u);
  }
  report.n_users = static_cast<int>(report.per_user.size());
  if (report.n_users > 0) {
    report.map /= report.n_users;
    report.auc /= report.n_users;
  }
  return report;
}

ItemScorer::ItemScorer(const ItemCatalog& catalog, const EncoderVariant& encoder,
                       const JointModelParams& model, const PretrainedMatrix* pretrained)
    : model_(model), vectors_(catalog.size(), model.user_emb.cols) {
  if (model.mode == ModelMode::TerPlus && pretrained == nullptr) {
    throw Error(ErrorCode::Config, "joint mode requires a pre-trained embedding matrix");
  }
  SeededRng unused(0);
  for (int i = 0; i < catalog.size(); ++i) {
    const auto& item = catalog.item(i);
    auto enc_out = encoder_forward(encoder, item.tokens);
    std::vector<float> vec;
    if (model.mode == ModelMode::TerPlus) {
      vec = combine(model, enc_out.h1, pretrained->row(item.id), false, unused).vec;
    } else {
      vec = std::move(enc_out.h1);
    }
    if (static_cast<int>(vec.size()) != vectors_.cols) {
      throw Error(ErrorCode::Shape, "item vector dim " + std::to_string(vec.size()) +
                                        " does not match user dim " + std::to_string(vectors_.cols));
    }
    std::copy(vec.begin(), vec.end(), vectors_.row(i).begin());
  }
}

double ItemScorer::operator()(int user, int item) const {
  return score(model_, user, vectors_.row(item));
}

std::vector<SweepPoint> dropout_sweep(const ItemCatalog& catalog,
                                      const InteractionSet& interactions,
                                      const PretrainedMatrix& pretrained, TrainConfig config,
                                      std::span<const double> rates, int eval_negatives,
                                      int vocab_size) {
  if (config.mode != ModelMode::TerPlus) {
    throw Error(ErrorCode::Config, "dropout sweep requires joint mode");
  }
  std::vector<SweepPoint> out;
  out.reserve(rates.size());
  for (double rate : rates) {
    config.dropout_pretrained = static_cast<float>(rate);
    auto trained = run_training(catalog, interactions, &pretrained, config, vocab_size);
    auto sets = build_candidate_sets(interactions, eval_negatives,
                                     SeededRng(config.seed).split("candidates"));
    ItemScorer scorer(catalog, trained.encoder, trained.model, &pretrained);
    const auto report = evaluate(scorer, sets, catalog);
    out.push_back({rate, report.map});
  }
  return out;
}

}  // namespace ter
