#include "ter/commands.hpp"

#include <algorithm>
#include <cstdio>

#include "ter/error.hpp"

namespace ter {

namespace {

std::string require(const std::string& value, const char* what) {
  if (value.empty()) throw Error(ErrorCode::Config, std::string("missing required path: ") + what);
  return value;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Stream seeds shared by training and re-evaluation.
SeededRng split_stream(std::uint64_t seed) { return SeededRng(seed).split("item_split"); }
SeededRng candidate_stream(std::uint64_t seed) { return SeededRng(seed).split("candidates"); }

struct SupervisedData {
  Vocabulary vocab;
  ItemCatalog catalog;
  InteractionSet interactions;
};

SupervisedData load_supervised_data(const RunConfig& config) {
  auto rows = read_text_rows(require(config.texts, "texts"));
  std::vector<std::string> raw;
  raw.reserve(rows.size());
  for (const auto& r : rows) raw.push_back(r.raw);
  auto vocab = Vocabulary::build(raw, config.min_count);

  std::vector<TextItem> items;
  items.reserve(rows.size());
  for (auto& r : rows) items.push_back({std::move(r.id), vocab.encode(r.raw, config.max_len)});
  ItemCatalog catalog(std::move(items));

  auto interactions = load_interactions(require(config.interactions, "interactions"), catalog);
  auto stream = split_stream(config.train.seed);
  auto [train_ids, test_ids] = split_items(catalog.sorted_ids(), config.holdout_fraction, stream);
  InteractionSet set(interactions, catalog, test_ids);
  return {std::move(vocab), std::move(catalog), std::move(set)};
}

}  // namespace

void put_config(Checkpoint& ckpt, const RunConfig& config) {
  ckpt.header["config"] = config_to_json(config);
  ckpt.header["mode"] = to_string(config.train.mode);
  ckpt.header["dropout_rate"] = config.train.dropout_pretrained;
}

RunConfig get_config(const Checkpoint& ckpt) {
  if (!ckpt.header.contains("config")) {
    throw Error(ErrorCode::Format, "checkpoint header has no config echo");
  }
  return config_from_json(ckpt.header.at("config"));
}

void put_vocabulary(Checkpoint& ckpt, const Vocabulary& vocab) {
  ckpt.header["vocabulary"] = {
      {"min_count", vocab.min_count()}, {"tokens", vocab.tokens()}, {"freqs", vocab.freqs()}};
}

Vocabulary get_vocabulary(const Checkpoint& ckpt) {
  if (!ckpt.header.contains("vocabulary")) {
    throw Error(ErrorCode::Format, "checkpoint header has no vocabulary");
  }
  const auto& v = ckpt.header.at("vocabulary");
  return Vocabulary::from_parts(v.at("tokens").get<std::vector<std::string>>(),
                                v.at("freqs").get<std::vector<std::int64_t>>(),
                                v.at("min_count").get<int>());
}

void put_pretrained(Checkpoint& ckpt, const PretrainedMatrix& pretrained) {
  ckpt.header["pv_doc_ids"] = pretrained.ids();
  ckpt.put_tensor("pv.doc_embeddings", pretrained.matrix());
}

PretrainedMatrix get_pretrained(const Checkpoint& ckpt) {
  if (!ckpt.header.contains("pv_doc_ids")) {
    throw Error(ErrorCode::Format, "checkpoint has no pre-trained document table");
  }
  return PretrainedMatrix(ckpt.tensor("pv.doc_embeddings"),
                          ckpt.header.at("pv_doc_ids").get<std::vector<std::string>>());
}

void put_joint_state(Checkpoint& ckpt, const EncoderVariant& encoder,
                     const JointModelParams& model, const std::vector<std::string>& user_ids) {
  ckpt.header["user_ids"] = user_ids;
  if (const auto* mov = std::get_if<MovParams>(&encoder)) {
    ckpt.put_tensor("enc.word_emb", mov->word_emb);
    ckpt.put_tensor("enc.dense_w", mov->dense_w);
    ckpt.put_tensor("enc.dense_b", mov->dense_b);
  } else {
    const auto& cnn = std::get<CnnParams>(encoder);
    ckpt.put_tensor("enc.word_emb", cnn.word_emb);
    ckpt.put_tensor("enc.filters", cnn.filters);
    ckpt.put_tensor("enc.filter_bias", cnn.filter_bias);
  }
  ckpt.put_tensor("joint.user_emb", model.user_emb);
  if (model.mode == ModelMode::TerPlus) {
    ckpt.put_tensor("joint.comb_w", model.comb_w);
    ckpt.put_tensor("joint.comb_b", model.comb_b);
  }
}

JointState load_joint_state(const Checkpoint& ckpt) {
  JointState state;
  state.config = get_config(ckpt);
  state.vocab = get_vocabulary(ckpt);
  if (!ckpt.header.contains("user_ids")) {
    throw Error(ErrorCode::Format, "checkpoint has no user table (not a trained checkpoint?)");
  }
  state.user_ids = ckpt.header.at("user_ids").get<std::vector<std::string>>();

  if (state.config.train.encoder == EncoderKind::Mov) {
    MovParams p;
    p.word_emb = ckpt.tensor("enc.word_emb");
    p.dense_w = ckpt.tensor("enc.dense_w");
    p.dense_b = ckpt.tensor("enc.dense_b");
    state.encoder = std::move(p);
  } else {
    CnnParams p;
    p.word_emb = ckpt.tensor("enc.word_emb");
    p.filters = ckpt.tensor("enc.filters");
    p.filter_bias = ckpt.tensor("enc.filter_bias");
    p.filter_size = state.config.train.cnn_filter_size;
    state.encoder = std::move(p);
  }

  state.model.mode = state.config.train.mode;
  state.model.dropout_rate = state.config.train.dropout_pretrained;
  state.model.user_emb = ckpt.tensor("joint.user_emb");
  if (state.model.mode == ModelMode::TerPlus) {
    state.model.comb_w = ckpt.tensor("joint.comb_w");
    state.model.comb_b = ckpt.tensor("joint.comb_b");
    state.pretrained = get_pretrained(ckpt);
  }
  if (static_cast<int>(state.user_ids.size()) != state.model.user_emb.rows) {
    throw Error(ErrorCode::Format, "user table size does not match user embedding rows");
  }
  return state;
}

PretrainOutput cmd_pretrain(const RunConfig& config, std::ostream& out) {
  auto rows = read_text_rows(require(config.pretrain_corpus, "pretrain_corpus"));
  std::vector<std::string> raw;
  raw.reserve(rows.size());
  for (const auto& r : rows) raw.push_back(r.raw);
  auto vocab = Vocabulary::build(raw, config.min_count);

  std::vector<TextItem> docs;
  docs.reserve(rows.size());
  for (auto& r : rows) docs.push_back({std::move(r.id), vocab.encode(r.raw, config.max_len)});

  auto result = pretrain(docs, vocab, config.pv_config(), SeededRng(config.train.seed).split("pv"));

  Checkpoint ckpt;
  put_config(ckpt, config);
  put_vocabulary(ckpt, vocab);
  put_pretrained(ckpt, result.matrix);
  const auto path = require(config.checkpoint_out, "checkpoint_out");
  ckpt.save(path);

  out << "docs\t" << docs.size() << "\n";
  out << "vocab_size\t" << vocab.size() << "\n";
  out << "skipped_empty_docs\t" << result.skipped_empty_docs << "\n";
  for (std::size_t e = 0; e < result.epoch_mean_loss.size(); ++e) {
    out << "pv_epoch\t" << (e + 1) << "\t" << fmt(result.epoch_mean_loss[e]) << "\n";
  }
  return {path, static_cast<int>(docs.size()), vocab.size()};
}

TrainOutput cmd_train(const RunConfig& config, std::ostream& out) {
  auto data = load_supervised_data(config);

  std::optional<PretrainedMatrix> pretrained;
  if (config.train.mode == ModelMode::TerPlus) {
    if (config.checkpoint_in.empty()) {
      throw Error(ErrorCode::Config, "mode 'ter+' requires checkpoint_in with a pre-trained matrix");
    }
    pretrained = get_pretrained(Checkpoint::load(config.checkpoint_in));
  }

  auto trained = run_training(data.catalog, data.interactions,
                              pretrained ? &*pretrained : nullptr, config.train,
                              data.vocab.size());

  out << format_loss_trace(trained.trace.epoch_mean_loss);

  auto sets = build_candidate_sets(data.interactions, config.eval_negatives,
                                   candidate_stream(config.train.seed));
  ItemScorer scorer(data.catalog, trained.encoder, trained.model,
                    pretrained ? &*pretrained : nullptr);
  auto report = evaluate(scorer, sets, data.catalog);
  out << format_eval_report(report);

  Checkpoint ckpt;
  put_config(ckpt, config);
  put_vocabulary(ckpt, data.vocab);
  put_joint_state(ckpt, trained.encoder, trained.model, data.interactions.user_ids());
  if (pretrained) put_pretrained(ckpt, *pretrained);
  const auto path = require(config.checkpoint_out, "checkpoint_out");
  ckpt.save(path);

  return {path, trained.trace.epoch_mean_loss, std::move(report)};
}

EvalReport cmd_eval(const RunConfig& config, std::ostream& out) {
  auto ckpt = Checkpoint::load(require(config.checkpoint_in, "checkpoint_in"));
  auto state = load_joint_state(ckpt);
  auto& stored = state.config;

  // Candidate sets are rebuilt under the stored seed and split settings;
  // the vocabulary comes from the checkpoint so token ids line up.
  const auto texts_path = !config.texts.empty() ? config.texts : stored.texts;
  const auto inter_path = !config.interactions.empty() ? config.interactions : stored.interactions;
  auto catalog = load_texts(require(texts_path, "texts"), state.vocab, stored.max_len);
  auto raw = load_interactions(require(inter_path, "interactions"), catalog);
  auto stream = split_stream(stored.train.seed);
  auto [train_ids, test_ids] = split_items(catalog.sorted_ids(), stored.holdout_fraction, stream);
  InteractionSet interactions(raw, catalog, test_ids);

  // Users index into the checkpoint's embedding rows.
  std::vector<int> user_row(static_cast<std::size_t>(interactions.n_users()));
  {
    std::unordered_map<std::string, int> rows;
    for (int i = 0; i < static_cast<int>(state.user_ids.size()); ++i) {
      rows.emplace(state.user_ids[static_cast<std::size_t>(i)], i);
    }
    for (int u = 0; u < interactions.n_users(); ++u) {
      auto it = rows.find(interactions.user_ids()[static_cast<std::size_t>(u)]);
      if (it == rows.end()) {
        throw Error(ErrorCode::Data, "user '" + interactions.user_ids()[static_cast<std::size_t>(u)] +
                                         "' has no embedding in the checkpoint");
      }
      user_row[static_cast<std::size_t>(u)] = it->second;
    }
  }

  auto sets = build_candidate_sets(interactions, stored.eval_negatives,
                                   candidate_stream(stored.train.seed));
  ItemScorer scorer(catalog, state.encoder, state.model,
                    state.pretrained ? &*state.pretrained : nullptr);
  auto report = evaluate(
      [&](int user, int item) { return scorer(user_row[static_cast<std::size_t>(user)], item); },
      sets, catalog);
  out << format_eval_report(report);
  return report;
}

std::vector<RankedItem> cmd_rank(const RunConfig& config, const std::string& user_id, int top_k,
                                 std::ostream& out) {
  if (top_k < 1) throw Error(ErrorCode::Arg, "top_k must be >= 1");
  auto ckpt = Checkpoint::load(require(config.checkpoint_in, "checkpoint_in"));
  auto state = load_joint_state(ckpt);

  int user_row = -1;
  for (int i = 0; i < static_cast<int>(state.user_ids.size()); ++i) {
    if (state.user_ids[static_cast<std::size_t>(i)] == user_id) {
      user_row = i;
      break;
    }
  }
  if (user_row < 0) {
    throw Error(ErrorCode::Data, "unknown user '" + user_id + "' (checkpoint has " +
                                     std::to_string(state.user_ids.size()) + " users)");
  }

  const auto texts_path = !config.texts.empty() ? config.texts : state.config.texts;
  auto catalog = load_texts(require(texts_path, "texts"), state.vocab, state.config.max_len);
  ItemScorer scorer(catalog, state.encoder, state.model,
                    state.pretrained ? &*state.pretrained : nullptr);

  std::vector<RankedItem> ranked;
  ranked.reserve(static_cast<std::size_t>(catalog.size()));
  for (int i = 0; i < catalog.size(); ++i) {
    ranked.push_back({catalog.item(i).id, scorer(user_row, i)});
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedItem& a, const RankedItem& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.item_id < b.item_id;
  });
  if (static_cast<int>(ranked.size()) > top_k) ranked.resize(static_cast<std::size_t>(top_k));
  out << format_ranked(ranked);
  return ranked;
}

std::vector<SweepPoint> cmd_sweep_dropout(const RunConfig& config, std::span<const double> rates,
                                          std::ostream& out) {
  if (config.train.mode != ModelMode::TerPlus) {
    throw Error(ErrorCode::Config, "sweep-dropout requires mode 'ter+'");
  }
  if (config.checkpoint_in.empty()) {
    throw Error(ErrorCode::Config, "sweep-dropout requires checkpoint_in with a pre-trained matrix");
  }
  auto data = load_supervised_data(config);
  auto pretrained = get_pretrained(Checkpoint::load(config.checkpoint_in));
  auto points = dropout_sweep(data.catalog, data.interactions, pretrained, config.train, rates,
                              config.eval_negatives, data.vocab.size());
  out << format_sweep(points);
  return points;
}

std::string format_loss_trace(std::span<const double> trace) {
  std::string s = "epoch\tmean_loss\n";
  for (std::size_t e = 0; e < trace.size(); ++e) {
    s += std::to_string(e + 1) + "\t" + fmt(trace[e]) + "\n";
  }
  return s;
}

std::string format_eval_report(const EvalReport& report) {
  std::string s = "map\tauc\tn_users\tn_candidate_sets\n";
  s += fmt(report.map) + "\t" + fmt(report.auc) + "\t" + std::to_string(report.n_users) + "\t" +
       std::to_string(report.n_candidate_sets) + "\n";
  return s;
}

std::string format_sweep(std::span<const SweepPoint> points) {
  std::string s = "dropout_rate\tmap\n";
  for (const auto& p : points) s += fmt(p.rate) + "\t" + fmt(p.map) + "\n";
  return s;
}

std::string format_ranked(std::span<const RankedItem> items) {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) {
    s += std::to_string(i + 1) + "\t" + items[i].item_id + "\t" + fmt(items[i].score) + "\n";
  }
  return s;
}

}  // namespace ter
