#include "support/planted.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "ter/rng.hpp"

namespace ter::testsupport {

namespace {

std::string item_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "item%04d", i);
  return buf;
}

std::string user_name(int u) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "user%04d", u);
  return buf;
}

}  // namespace

PlantedDataset make_planted(const PlantedSpec& spec) {
  SeededRng rng(spec.seed);
  auto text_rng = rng.split("texts");
  auto user_rng = rng.split("users");

  PlantedDataset data;
  const int n_clusters = spec.topics * spec.clusters_per_topic;
  const int n_items = n_clusters * spec.items_per_cluster;

  for (int i = 0; i < n_items; ++i) {
    const int cluster = i / spec.items_per_cluster;
    const int topic = cluster / spec.clusters_per_topic;
    data.item_topic.push_back(topic);
    data.item_cluster.push_back(cluster);

    std::string text;
    const int topic_tokens = spec.tokens_per_item / 2;
    for (int t = 0; t < topic_tokens; ++t) {
      const auto w = text_rng.next_below(static_cast<std::uint64_t>(spec.topic_vocab));
      text += "t" + std::to_string(topic) + "w" + std::to_string(w) + " ";
    }
    for (int t = topic_tokens; t < spec.tokens_per_item; ++t) {
      const auto w = text_rng.next_below(static_cast<std::uint64_t>(spec.cluster_vocab));
      text += "c" + std::to_string(cluster) + "w" + std::to_string(w) + " ";
    }
    if (!text.empty()) text.pop_back();
    data.texts.push_back({item_name(i), std::move(text)});
  }

  for (int u = 0; u < spec.users; ++u) {
    std::vector<int> liked;
    if (spec.cluster_positives && spec.clusters_per_topic > 1) {
      const int cluster = u % n_clusters;
      for (int j = 0; j < spec.items_per_cluster; ++j) {
        liked.push_back(cluster * spec.items_per_cluster + j);
      }
    } else {
      // Flat mode: sample positives from the user's own topic.
      const int topic = u % spec.topics;
      std::vector<int> topic_items;
      for (int i = 0; i < n_items; ++i) {
        if (data.item_topic[static_cast<std::size_t>(i)] == topic) topic_items.push_back(i);
      }
      const int want = std::min<int>(spec.positives_per_user, static_cast<int>(topic_items.size()));
      for (int j = 0; j < want; ++j) {
        const auto pick = static_cast<std::size_t>(j) +
                          user_rng.next_below(topic_items.size() - static_cast<std::size_t>(j));
        std::swap(topic_items[static_cast<std::size_t>(j)], topic_items[pick]);
        liked.push_back(topic_items[static_cast<std::size_t>(j)]);
      }
    }
    if (spec.shuffle_labels) {
      // Control: replace the positives with uniform random items.
      std::vector<int> all(static_cast<std::size_t>(n_items));
      for (int i = 0; i < n_items; ++i) all[static_cast<std::size_t>(i)] = i;
      for (std::size_t j = 0; j < liked.size(); ++j) {
        const auto pick = j + user_rng.next_below(all.size() - j);
        std::swap(all[j], all[pick]);
        liked[j] = all[j];
      }
    }
    std::sort(liked.begin(), liked.end());
    for (int item : liked) data.interactions.emplace_back(user_name(u), item_name(item));
  }
  return data;
}

PlantedBundle bundle_from(const PlantedDataset& data, double holdout_fraction, std::uint64_t seed,
                          int min_count, int max_len) {
  std::vector<std::string> raw;
  raw.reserve(data.texts.size());
  for (const auto& row : data.texts) raw.push_back(row.raw);
  auto vocab = Vocabulary::build(raw, min_count);

  std::vector<TextItem> items;
  items.reserve(data.texts.size());
  for (const auto& row : data.texts) items.push_back({row.id, vocab.encode(row.raw, max_len)});
  ItemCatalog catalog(std::move(items));

  RawInteractions rawi;
  rawi.pairs = data.interactions;

  auto stream = SeededRng(seed).split("item_split");
  auto [train_ids, test_ids] = split_items(catalog.sorted_ids(), holdout_fraction, stream);
  InteractionSet set(rawi, catalog, test_ids);
  return {std::move(vocab), std::move(catalog), std::move(set)};
}

void write_tsv_files(const PlantedDataset& data, const std::string& texts_path,
                     const std::string& interactions_path) {
  std::ofstream texts(texts_path, std::ios::trunc);
  if (!texts) throw std::runtime_error("cannot write " + texts_path);
  for (const auto& row : data.texts) texts << row.id << '\t' << row.raw << '\n';
  std::ofstream inter(interactions_path, std::ios::trunc);
  if (!inter) throw std::runtime_error("cannot write " + interactions_path);
  for (const auto& [user, item] : data.interactions) inter << user << '\t' << item << '\n';
}

PvCorpus make_pv_corpus(const PvCorpusSpec& spec) {
  SeededRng rng(spec.seed);
  auto text_rng = rng.split("pv_texts");
  PvCorpus corpus;
  for (int topic = 0; topic < 2; ++topic) {
    for (int d = 0; d < spec.docs_per_topic; ++d) {
      std::string text;
      for (int t = 0; t < spec.tokens_per_doc; ++t) {
        const auto w = text_rng.next_below(static_cast<std::uint64_t>(spec.vocab_per_topic));
        text += "t" + std::to_string(topic) + "w" + std::to_string(w) + " ";
      }
      text.pop_back();
      corpus.texts.push_back({"doc" + std::to_string(topic) + "_" + std::to_string(d), std::move(text)});
      corpus.doc_topic.push_back(topic);
    }
  }
  return corpus;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace ter::testsupport
