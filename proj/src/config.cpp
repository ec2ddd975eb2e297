#include "ter/config.hpp"

#include <fstream>
#include <set>

#include "ter/error.hpp"

namespace ter {

PvConfig RunConfig::pv_config() const {
  PvConfig c;
  c.dim = pv_dim;
  c.window = pv_window;
  c.negatives = pv_negatives;
  c.epochs = pv_epochs;
  c.lr_start = pv_lr;
  return c;
}

namespace {

const std::set<std::string>& allowed_keys() {
  static const std::set<std::string> keys = {
      "mode",           "encoder",        "seed",
      "epochs",         "batch_size",     "learning_rate",
      "weight_decay",   "dropout_item",   "dropout_pretrained",
      "embedding_dim",  "word_dim",       "cnn_filters",
      "cnn_filter_size", "negative_exponent",
      "min_count",      "max_len",        "holdout_fraction",
      "eval_negatives", "pv_dim",         "pv_window",
      "pv_negatives",   "pv_epochs",      "pv_lr",
      "interactions",   "texts",          "pretrain_corpus",
      "checkpoint_in",  "checkpoint_out",
  };
  return keys;
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::Config, std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Config, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed_keys().contains(key)) {
      throw Error(ErrorCode::Config, "unknown config key '" + key + "'");
    }
  }

  RunConfig c;
  std::string mode = "ter";
  std::string encoder = "mov";
  read(j, "mode", mode);
  read(j, "encoder", encoder);
  c.train.mode = model_mode_from_string(mode);
  c.train.encoder = encoder_kind_from_string(encoder);
  read(j, "seed", c.train.seed);
  read(j, "epochs", c.train.epochs);
  read(j, "batch_size", c.train.batch_size);
  read(j, "learning_rate", c.train.learning_rate);
  read(j, "weight_decay", c.train.weight_decay);
  read(j, "dropout_item", c.train.dropout_item);
  read(j, "dropout_pretrained", c.train.dropout_pretrained);
  read(j, "embedding_dim", c.train.embedding_dim);
  read(j, "word_dim", c.train.word_dim);
  read(j, "cnn_filters", c.train.cnn_filters);
  read(j, "cnn_filter_size", c.train.cnn_filter_size);
  read(j, "negative_exponent", c.train.negative_exponent);
  read(j, "min_count", c.min_count);
  read(j, "max_len", c.max_len);
  read(j, "holdout_fraction", c.holdout_fraction);
  read(j, "eval_negatives", c.eval_negatives);
  read(j, "pv_dim", c.pv_dim);
  read(j, "pv_window", c.pv_window);
  read(j, "pv_negatives", c.pv_negatives);
  read(j, "pv_epochs", c.pv_epochs);
  read(j, "pv_lr", c.pv_lr);
  read(j, "interactions", c.interactions);
  read(j, "texts", c.texts);
  read(j, "pretrain_corpus", c.pretrain_corpus);
  read(j, "checkpoint_in", c.checkpoint_in);
  read(j, "checkpoint_out", c.checkpoint_out);

  if (c.min_count < 0) throw Error(ErrorCode::Config, "min_count must be >= 0");
  if (c.max_len < 1) throw Error(ErrorCode::Config, "max_len must be >= 1");
  if (c.holdout_fraction < 0.0 || c.holdout_fraction >= 1.0) {
    throw Error(ErrorCode::Config, "holdout_fraction must be in [0, 1)");
  }
  if (c.eval_negatives < 1) throw Error(ErrorCode::Config, "eval_negatives must be >= 1");
  if (c.pv_dim < 1 || c.pv_window < 0 || c.pv_negatives < 1 || c.pv_epochs < 1) {
    throw Error(ErrorCode::Config, "pv_* settings out of range");
  }
  return c;
}

nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json j;
  j["mode"] = to_string(c.train.mode);
  j["encoder"] = to_string(c.train.encoder);
  j["seed"] = c.train.seed;
  j["epochs"] = c.train.epochs;
  j["batch_size"] = c.train.batch_size;
  j["learning_rate"] = c.train.learning_rate;
  j["weight_decay"] = c.train.weight_decay;
  j["dropout_item"] = c.train.dropout_item;
  j["dropout_pretrained"] = c.train.dropout_pretrained;
  j["embedding_dim"] = c.train.embedding_dim;
  j["word_dim"] = c.train.word_dim;
  j["cnn_filters"] = c.train.cnn_filters;
  j["cnn_filter_size"] = c.train.cnn_filter_size;
  j["negative_exponent"] = c.train.negative_exponent;
  j["min_count"] = c.min_count;
  j["max_len"] = c.max_len;
  j["holdout_fraction"] = c.holdout_fraction;
  j["eval_negatives"] = c.eval_negatives;
  j["pv_dim"] = c.pv_dim;
  j["pv_window"] = c.pv_window;
  j["pv_negatives"] = c.pv_negatives;
  j["pv_epochs"] = c.pv_epochs;
  j["pv_lr"] = c.pv_lr;
  j["interactions"] = c.interactions;
  j["texts"] = c.texts;
  j["pretrain_corpus"] = c.pretrain_corpus;
  j["checkpoint_in"] = c.checkpoint_in;
  j["checkpoint_out"] = c.checkpoint_out;
  return j;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, "cannot parse config file " + path + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace ter
