#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ter/corpus.hpp"

namespace ter::testsupport {

/// Synthetic preference data: items carry topic-level vocabulary plus a
/// finer per-cluster vocabulary, and each user likes every item of one
/// cluster. With clusters_per_topic == 1 this degenerates to the flat
/// two-topic corpus (users sample positives_per_user items of their
/// topic instead).
struct PlantedSpec {
  int topics = 2;
  int clusters_per_topic = 8;
  int items_per_cluster = 25;
  int users = 200;
  int topic_vocab = 40;
  int cluster_vocab = 12;
  int tokens_per_item = 12;  // half topic words, half cluster words
  int positives_per_user = 20;
  bool cluster_positives = true;
  bool shuffle_labels = false;
  std::uint64_t seed = 1;
};

struct PlantedDataset {
  std::vector<TextRow> texts;
  std::vector<std::pair<std::string, std::string>> interactions;  // (user, item)
  std::vector<int> item_topic;
  std::vector<int> item_cluster;

  int n_items() const { return static_cast<int>(texts.size()); }
};

PlantedDataset make_planted(const PlantedSpec& spec);

/// Replays the supervised data pipeline: vocabulary, catalog, item
/// split and interaction partition, with the same stream tags the
/// commands use.
struct PlantedBundle {
  Vocabulary vocab;
  ItemCatalog catalog;
  InteractionSet interactions;
};
PlantedBundle bundle_from(const PlantedDataset& data, double holdout_fraction, std::uint64_t seed,
                          int min_count = 1, int max_len = 200);

/// Writes the dataset as the two TSV input files.
void write_tsv_files(const PlantedDataset& data, const std::string& texts_path,
                     const std::string& interactions_path);

/// Flat two-topic document corpus for pre-training tests.
struct PvCorpusSpec {
  int docs_per_topic = 20;
  int tokens_per_doc = 20;
  int vocab_per_topic = 30;
  std::uint64_t seed = 7;
};

struct PvCorpus {
  std::vector<TextRow> texts;
  std::vector<int> doc_topic;
};

PvCorpus make_pv_corpus(const PvCorpusSpec& spec);

double cosine(std::span<const float> a, std::span<const float> b);

}  // namespace ter::testsupport
