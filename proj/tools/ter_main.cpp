#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ter/commands.hpp"
#include "ter/error.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON run configuration");
  cmd->add_option("--seed", args.seed, "Override the configured seed");
  cmd->add_option("--out", args.out_path, "Output path override");
}

ter::RunConfig resolve_config(const CommonArgs& args) {
  ter::RunConfig config;
  if (!args.config_path.empty()) config = ter::load_config_file(args.config_path);
  if (args.seed) config.train.seed = *args.seed;
  return config;
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ter::Error(ter::ErrorCode::Io, "cannot write output file: " + path);
  out << body;
}

std::vector<double> parse_rates(const std::string& csv) {
  std::vector<double> rates;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const auto comma = csv.find(',', pos);
    const auto part = csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      rates.push_back(std::stod(part));
    } catch (const std::exception&) {
      throw ter::Error(ter::ErrorCode::Arg, "bad dropout rate '" + part + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return rates;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint text-embedding recommender: train and rank completely new text items"};
  app.require_subcommand(1);

  CommonArgs pretrain_args;
  auto* pretrain = app.add_subcommand("pretrain", "Stage one: unsupervised text embedding matrix");
  add_common(pretrain, pretrain_args);

  CommonArgs train_args;
  std::string train_pretrained;
  auto* train = app.add_subcommand("train", "Stage two: supervised training + held-out evaluation");
  add_common(train, train_args);
  train->add_option("--pretrained", train_pretrained, "Pretrain checkpoint (ter+ mode)");

  CommonArgs eval_args;
  std::string eval_checkpoint;
  auto* eval = app.add_subcommand("eval", "Evaluate a trained checkpoint on the held-out split");
  add_common(eval, eval_args);
  eval->add_option("--checkpoint", eval_checkpoint, "Trained checkpoint path");

  CommonArgs rank_args;
  std::string rank_checkpoint, rank_user, rank_texts;
  int rank_top_k = 10;
  auto* rank = app.add_subcommand("rank", "Rank new texts for one user");
  add_common(rank, rank_args);
  rank->add_option("--checkpoint", rank_checkpoint, "Trained checkpoint path");
  rank->add_option("--user", rank_user, "User id")->required();
  rank->add_option("--texts", rank_texts, "Texts TSV with candidate items");
  rank->add_option("--top-k", rank_top_k, "Number of items to print");

  CommonArgs sweep_args;
  std::string sweep_pretrained;
  std::string sweep_rates = "0,0.25,0.5,0.75,1";
  auto* sweep = app.add_subcommand("sweep-dropout", "Retrain per dropout rate and report MAP");
  add_common(sweep, sweep_args);
  sweep->add_option("--pretrained", sweep_pretrained, "Pretrain checkpoint (ter+ mode)");
  sweep->add_option("--rates", sweep_rates, "Comma-separated dropout rates");

  CLI11_PARSE(app, argc, argv);

  try {
    if (pretrain->parsed()) {
      auto config = resolve_config(pretrain_args);
      if (!pretrain_args.out_path.empty()) config.checkpoint_out = pretrain_args.out_path;
      ter::cmd_pretrain(config, std::cout);
    } else if (train->parsed()) {
      auto config = resolve_config(train_args);
      if (!train_pretrained.empty()) config.checkpoint_in = train_pretrained;
      if (!train_args.out_path.empty()) config.checkpoint_out = train_args.out_path;
      auto result = ter::cmd_train(config, std::cout);
      if (!train_args.out_path.empty()) {
        // Checkpoint went to --out; report lands next to it.
        write_file(train_args.out_path + ".report.tsv",
                   ter::format_loss_trace(result.loss_trace) + ter::format_eval_report(result.report));
      }
    } else if (eval->parsed()) {
      auto config = resolve_config(eval_args);
      if (!eval_checkpoint.empty()) config.checkpoint_in = eval_checkpoint;
      auto report = ter::cmd_eval(config, std::cout);
      if (!eval_args.out_path.empty()) write_file(eval_args.out_path, ter::format_eval_report(report));
    } else if (rank->parsed()) {
      auto config = resolve_config(rank_args);
      if (!rank_checkpoint.empty()) config.checkpoint_in = rank_checkpoint;
      if (!rank_texts.empty()) config.texts = rank_texts;
      auto ranked = ter::cmd_rank(config, rank_user, rank_top_k, std::cout);
      if (!rank_args.out_path.empty()) write_file(rank_args.out_path, ter::format_ranked(ranked));
    } else if (sweep->parsed()) {
      auto config = resolve_config(sweep_args);
      if (!sweep_pretrained.empty()) config.checkpoint_in = sweep_pretrained;
      auto rates = parse_rates(sweep_rates);
      auto points = ter::cmd_sweep_dropout(config, rates, std::cout);
      if (!sweep_args.out_path.empty()) write_file(sweep_args.out_path, ter::format_sweep(points));
    }
  } catch (const ter::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "E_UNKNOWN: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
