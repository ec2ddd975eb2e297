#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ter/checkpoint.hpp"
#include "ter/config.hpp"
#include "ter/trainkit.hpp"

namespace ter {

// Checkpoint header helpers shared by the commands.
void put_config(Checkpoint& ckpt, const RunConfig& config);
RunConfig get_config(const Checkpoint& ckpt);
void put_vocabulary(Checkpoint& ckpt, const Vocabulary& vocab);
Vocabulary get_vocabulary(const Checkpoint& ckpt);
void put_pretrained(Checkpoint& ckpt, const PretrainedMatrix& pretrained);
PretrainedMatrix get_pretrained(const Checkpoint& ckpt);
void put_joint_state(Checkpoint& ckpt, const EncoderVariant& encoder,
                     const JointModelParams& model, const std::vector<std::string>& user_ids);

/// Trained state reconstructed from a stage-two checkpoint.
struct JointState {
  RunConfig config;
  Vocabulary vocab;
  std::vector<std::string> user_ids;
  EncoderVariant encoder;
  JointModelParams model;
  std::optional<PretrainedMatrix> pretrained;
};
JointState load_joint_state(const Checkpoint& ckpt);

struct PretrainOutput {
  std::string checkpoint_path;
  int n_docs = 0;
  int vocab_size = 0;
};

/// Stage one: Paragraph Vector pre-training over the unlabeled corpus.
PretrainOutput cmd_pretrain(const RunConfig& config, std::ostream& out);

struct TrainOutput {
  std::string checkpoint_path;
  std::vector<double> loss_trace;
  EvalReport report;
};

/// Stage two: supervised training on the held-in split, evaluation on
/// the held-out split, checkpoint + TSV report.
TrainOutput cmd_train(const RunConfig& config, std::ostream& out);

/// Recomputes the held-out candidate sets under the checkpoint's stored
/// seed and reports MAP / average AUC.
EvalReport cmd_eval(const RunConfig& config, std::ostream& out);

struct RankedItem {
  std::string item_id;
  double score = 0.0;
};

/// Scores every text in the file for one user and prints the top_k as
/// `rank<TAB>item_id<TAB>score` (ties by ascending item id).
std::vector<RankedItem> cmd_rank(const RunConfig& config, const std::string& user_id, int top_k,
                                 std::ostream& out);

/// Retrains per dropout rate and emits a `dropout_rate<TAB>map` table.
std::vector<SweepPoint> cmd_sweep_dropout(const RunConfig& config, std::span<const double> rates,
                                          std::ostream& out);

// TSV formatting (shared between stdout and --out files).
std::string format_loss_trace(std::span<const double> trace);
std::string format_eval_report(const EvalReport& report);
std::string format_sweep(std::span<const SweepPoint> points);
std::string format_ranked(std::span<const RankedItem> items);

}  // namespace ter
