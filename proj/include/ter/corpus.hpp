#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ter/rng.hpp"

namespace ter {

/// Lowercases and splits on runs of non-alphanumeric bytes.
std::vector<std::string> tokenize(std::string_view raw_text);

/// Token <-> id map with corpus frequencies. Id 0 is padding, id 1 the
/// unknown token; real tokens start at id 2, ordered by descending
/// frequency (ties by token). Tokens below min_count map to unknown.
class Vocabulary {
 public:
  static constexpr int kPadId = 0;
  static constexpr int kUnkId = 1;

  static Vocabulary build(std::span<const std::string> texts, int min_count);

  /// Rebuild from serialized parts (checkpoint load).
  static Vocabulary from_parts(std::vector<std::string> tokens, std::vector<std::int64_t> freqs,
                               int min_count);

  int id_of(std::string_view token) const;  // kUnkId when absent
  const std::string& token_of(int id) const;
  std::int64_t freq(int id) const { return freqs_[static_cast<std::size_t>(id)]; }
  int size() const { return static_cast<int>(tokens_.size()); }
  int min_count() const { return min_count_; }

  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<std::int64_t>& freqs() const { return freqs_; }

  /// Token ids for one raw text, truncated to max_len; empty texts map
  /// to a single unknown token.
  std::vector<int> encode(std::string_view raw_text, int max_len) const;

 private:
  std::vector<std::string> tokens_;
  std::vector<std::int64_t> freqs_;
  std::unordered_map<std::string, int> index_;
  int min_count_ = 1;
};

/// One text item: external id plus encoded tokens (1 <= len <= max_len).
struct TextItem {
  std::string id;
  std::vector<int> tokens;
};

/// Raw rows of a texts TSV file, before vocabulary encoding.
struct TextRow {
  std::string id;
  std::string raw;
};

/// Parses `item_id<TAB>raw text` rows; rejects malformed or duplicate
/// rows with their line number.
std::vector<TextRow> read_text_rows(const std::string& path);

/// Item texts with id -> index lookup.
class ItemCatalog {
 public:
  ItemCatalog() = default;
  explicit ItemCatalog(std::vector<TextItem> items);

  int size() const { return static_cast<int>(items_.size()); }
  const TextItem& item(int index) const { return items_[static_cast<std::size_t>(index)]; }
  int index_of(std::string_view id) const;  // -1 when absent
  const std::vector<TextItem>& items() const { return items_; }

  /// Item ids in ascending order (used for the train/test split so the
  /// split depends only on the id set, not file order).
  std::vector<std::string> sorted_ids() const;

 private:
  std::vector<TextItem> items_;
  std::unordered_map<std::string, int> index_;
};

/// read_text_rows + vocabulary encoding in one step.
ItemCatalog load_texts(const std::string& path, const Vocabulary& vocab, int max_len);

/// Deduplicated (user_id, item_id) pairs in file order.
struct RawInteractions {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::int64_t duplicates = 0;
};

/// Parses `user_id<TAB>item_id` rows; every item must exist in the
/// catalog. Duplicate pairs are dropped and counted.
RawInteractions load_interactions(const std::string& path, const ItemCatalog& catalog);

/// Uniformly selects floor(fraction * N) ids into the test pool.
/// Requires at least 5 items. Both outputs are sorted.
std::pair<std::vector<std::string>, std::vector<std::string>> split_items(
    std::vector<std::string> item_ids, double holdout_fraction, SeededRng& rng);

/// Interactions partitioned by the item split. Users are indexed over
/// those with at least one training interaction (sorted by id); users
/// appearing only in held-out interactions are dropped and counted.
class InteractionSet {
 public:
  InteractionSet() = default;
  InteractionSet(const RawInteractions& raw, const ItemCatalog& catalog,
                 const std::vector<std::string>& test_item_ids);

  int n_users() const { return static_cast<int>(user_ids_.size()); }
  int n_items() const { return static_cast<int>(train_item_.size()); }
  const std::vector<std::string>& user_ids() const { return user_ids_; }
  int user_index(std::string_view id) const;  // -1 when absent

  std::span<const std::pair<int, int>> train_pairs() const { return train_pairs_; }
  std::span<const std::pair<int, int>> heldout_pairs() const { return heldout_pairs_; }

  const std::vector<std::int64_t>& train_item_freq() const { return train_item_freq_; }
  bool is_test_item(int item_index) const { return !train_item_[static_cast<std::size_t>(item_index)]; }
  bool is_train_item(int item_index) const { return train_item_[static_cast<std::size_t>(item_index)]; }
  std::vector<int> test_item_indices() const;
  const std::unordered_set<int>& positives_of(int user_index) const;
  std::int64_t dropped_test_only_users() const { return dropped_test_only_users_; }
  std::int64_t duplicates() const { return duplicates_; }

 private:
  std::vector<std::string> user_ids_;
  std::unordered_map<std::string, int> user_index_;
  std::vector<std::pair<int, int>> train_pairs_;    // (user, item) indices
  std::vector<std::pair<int, int>> heldout_pairs_;  // users restricted to trained ones
  std::vector<std::int64_t> train_item_freq_;       // per catalog item, training pairs only
  std::vector<bool> train_item_;                    // per catalog item
  std::vector<std::unordered_set<int>> positives_;  // per user, training items
  std::int64_t dropped_test_only_users_ = 0;
  std::int64_t duplicates_ = 0;
};

/// Draws (user, positive) uniformly from training interactions and a
/// negative proportional to training-item frequency ^ exponent,
/// resampling while the negative is a positive of that user.
class TripletSampler {
 public:
  struct Triplet {
    int user;
    int positive;
    int negative;
  };

  TripletSampler(const InteractionSet& interactions, double negative_exponent, SeededRng rng);

  Triplet sample();

  static constexpr int kMaxNegativeAttempts = 100;

 private:
  const InteractionSet& interactions_;
  std::vector<double> cumulative_;  // over items_ below
  std::vector<int> items_;          // train items with positive weight
  SeededRng rng_;
};

}  // namespace ter
