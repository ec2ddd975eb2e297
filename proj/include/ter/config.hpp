#pragma once

#include <string>

#include <json.hpp>

#include "ter/trainkit.hpp"

namespace ter {

/// Full run configuration: training hyperparameters plus file paths and
/// corpus / pre-training settings. JSON keys are allowlisted; unknown
/// keys are rejected so typos cannot silently fall back to defaults.
struct RunConfig {
  TrainConfig train;

  int min_count = 5;
  int max_len = 200;
  double holdout_fraction = 0.2;
  int eval_negatives = 10;

  int pv_dim = 50;
  int pv_window = 5;
  int pv_negatives = 5;
  int pv_epochs = 10;
  float pv_lr = 0.025f;

  std::string interactions;
  std::string texts;
  std::string pretrain_corpus;
  std::string checkpoint_in;
  std::string checkpoint_out;

  PvConfig pv_config() const;
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& config);
RunConfig load_config_file(const std::string& path);

}  // namespace ter
