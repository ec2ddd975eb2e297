#include "ter/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "ter/error.hpp"

namespace ter {

std::vector<std::string> tokenize(std::string_view raw_text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : raw_text) {
    const bool alnum = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
    if (alnum) {
      cur.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

Vocabulary Vocabulary::build(std::span<const std::string> texts, int min_count) {
  if (min_count < 1) min_count = 1;
  std::map<std::string, std::int64_t> counts;  // ordered: deterministic iteration
  for (const auto& text : texts) {
    for (auto& tok : tokenize(text)) counts[tok] += 1;
  }
  std::vector<std::pair<std::string, std::int64_t>> kept;
  std::int64_t unk_occurrences = 0;
  for (const auto& [tok, n] : counts) {
    if (n >= min_count) {
      kept.emplace_back(tok, n);
    } else {
      unk_occurrences += n;
    }
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary v;
  v.min_count_ = min_count;
  v.tokens_ = {"<pad>", "<unk>"};
  v.freqs_ = {0, unk_occurrences};
  for (auto& [tok, n] : kept) {
    v.index_.emplace(tok, static_cast<int>(v.tokens_.size()));
    v.tokens_.push_back(std::move(tok));
    v.freqs_.push_back(n);
  }
  return v;
}

Vocabulary Vocabulary::from_parts(std::vector<std::string> tokens, std::vector<std::int64_t> freqs,
                                  int min_count) {
  if (tokens.size() != freqs.size() || tokens.size() < 2) {
    throw Error(ErrorCode::Format, "vocabulary: tokens/freqs size mismatch");
  }
  Vocabulary v;
  v.min_count_ = min_count;
  v.tokens_ = std::move(tokens);
  v.freqs_ = std::move(freqs);
  for (int id = 2; id < static_cast<int>(v.tokens_.size()); ++id) {
    v.index_.emplace(v.tokens_[static_cast<std::size_t>(id)], id);
  }
  return v;
}

int Vocabulary::id_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::token_of(int id) const {
  if (id < 0 || id >= size()) throw Error(ErrorCode::Arg, "vocabulary: id out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocabulary::encode(std::string_view raw_text, int max_len) const {
  std::vector<int> ids;
  for (const auto& tok : tokenize(raw_text)) {
    if (static_cast<int>(ids.size()) >= max_len) break;
    ids.push_back(id_of(tok));
  }
  if (ids.empty()) ids.push_back(kUnkId);
  return ids;
}

namespace {

struct TsvLine {
  std::string first;
  std::string second;
};

std::vector<TsvLine> read_tsv(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, std::string("cannot open ") + what + " file: " + path);
  std::vector<TsvLine> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw Error(ErrorCode::Parse,
                  std::string(what) + " file " + path + ": malformed line " + std::to_string(line_no));
    }
    rows.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return rows;
}

}  // namespace

std::vector<TextRow> read_text_rows(const std::string& path) {
  auto rows = read_tsv(path, "texts");
  std::vector<TextRow> out;
  out.reserve(rows.size());
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto [it, inserted] = seen.emplace(rows[i].first, i);
    if (!inserted) {
      throw Error(ErrorCode::Parse, "texts file " + path + ": duplicate item id '" + rows[i].first +
                                        "' (row " + std::to_string(i + 1) + ")");
    }
    out.push_back({std::move(rows[i].first), std::move(rows[i].second)});
  }
  return out;
}

ItemCatalog::ItemCatalog(std::vector<TextItem> items) : items_(std::move(items)) {
  for (int i = 0; i < static_cast<int>(items_.size()); ++i) {
    index_.emplace(items_[static_cast<std::size_t>(i)].id, i);
  }
}

int ItemCatalog::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? -1 : it->second;
}

std::vector<std::string> ItemCatalog::sorted_ids() const {
  std::vector<std::string> ids;
  ids.reserve(items_.size());
  for (const auto& item : items_) ids.push_back(item.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

ItemCatalog load_texts(const std::string& path, const Vocabulary& vocab, int max_len) {
  auto rows = read_text_rows(path);
  std::vector<TextItem> items;
  items.reserve(rows.size());
  for (auto& row : rows) {
    items.push_back({std::move(row.id), vocab.encode(row.raw, max_len)});
  }
  return ItemCatalog(std::move(items));
}

RawInteractions load_interactions(const std::string& path, const ItemCatalog& catalog) {
  auto rows = read_tsv(path, "interactions");
  RawInteractions out;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (catalog.index_of(rows[i].second) < 0) {
      throw Error(ErrorCode::Data, "interactions file " + path + ": item '" + rows[i].second +
                                       "' (row " + std::to_string(i + 1) + ") has no text");
    }
    std::string key = rows[i].first + '\t' + rows[i].second;
    if (!seen.insert(std::move(key)).second) {
      out.duplicates += 1;
      continue;
    }
    out.pairs.emplace_back(std::move(rows[i].first), std::move(rows[i].second));
  }
  return out;
}

std::pair<std::vector<std::string>, std::vector<std::string>> split_items(
    std::vector<std::string> item_ids, double holdout_fraction, SeededRng& rng) {
  if (holdout_fraction < 0.0 || holdout_fraction >= 1.0) {
    throw Error(ErrorCode::Arg, "split_items: holdout fraction must be in [0, 1)");
  }
  if (item_ids.size() < 5) {
    throw Error(ErrorCode::Data, "split_items: need at least 5 items, got " +
                                     std::to_string(item_ids.size()));
  }
  std::sort(item_ids.begin(), item_ids.end());
  const auto n = item_ids.size();
  const auto n_test = static_cast<std::size_t>(std::floor(holdout_fraction * static_cast<double>(n)));
  // Partial Fisher-Yates: the first n_test slots become the test pool.
  for (std::size_t i = 0; i < n_test; ++i) {
    const auto j = i + rng.next_below(n - i);
    std::swap(item_ids[i], item_ids[j]);
  }
  std::vector<std::string> test(item_ids.begin(), item_ids.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::string> train(item_ids.begin() + static_cast<std::ptrdiff_t>(n_test), item_ids.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {std::move(train), std::move(test)};
}

InteractionSet::InteractionSet(const RawInteractions& raw, const ItemCatalog& catalog,
                               const std::vector<std::string>& test_item_ids) {
  duplicates_ = raw.duplicates;
  train_item_.assign(static_cast<std::size_t>(catalog.size()), true);
  for (const auto& id : test_item_ids) {
    const int idx = catalog.index_of(id);
    if (idx < 0) throw Error(ErrorCode::Data, "test item '" + id + "' not in catalog");
    train_item_[static_cast<std::size_t>(idx)] = false;
  }

  // Users with at least one training interaction, sorted by id.
  std::vector<std::string> training_users;
  std::unordered_set<std::string> training_user_set;
  for (const auto& [user, item] : raw.pairs) {
    const int item_idx = catalog.index_of(item);
    if (train_item_[static_cast<std::size_t>(item_idx)] && training_user_set.insert(user).second) {
      training_users.push_back(user);
    }
  }
  std::sort(training_users.begin(), training_users.end());
  user_ids_ = std::move(training_users);
  for (int i = 0; i < static_cast<int>(user_ids_.size()); ++i) {
    user_index_.emplace(user_ids_[static_cast<std::size_t>(i)], i);
  }

  train_item_freq_.assign(static_cast<std::size_t>(catalog.size()), 0);
  positives_.resize(user_ids_.size());
  std::unordered_set<std::string> dropped_users;
  for (const auto& [user, item] : raw.pairs) {
    const int item_idx = catalog.index_of(item);
    auto uit = user_index_.find(user);
    if (uit == user_index_.end()) {
      dropped_users.insert(user);
      continue;  // user has held-out interactions only; no embedding to learn
    }
    if (train_item_[static_cast<std::size_t>(item_idx)]) {
      train_pairs_.emplace_back(uit->second, item_idx);
      train_item_freq_[static_cast<std::size_t>(item_idx)] += 1;
      positives_[static_cast<std::size_t>(uit->second)].insert(item_idx);
    } else {
      heldout_pairs_.emplace_back(uit->second, item_idx);
    }
  }
  dropped_test_only_users_ = static_cast<std::int64_t>(dropped_users.size());
}

int InteractionSet::user_index(std::string_view id) const {
  auto it = user_index_.find(std::string(id));
  return it == user_index_.end() ? -1 : it->second;
}

std::vector<int> InteractionSet::test_item_indices() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(train_item_.size()); ++i) {
    if (!train_item_[static_cast<std::size_t>(i)]) out.push_back(i);
  }
  return out;
}

const std::unordered_set<int>& InteractionSet::positives_of(int user_index) const {
  return positives_[static_cast<std::size_t>(user_index)];
}

TripletSampler::TripletSampler(const InteractionSet& interactions, double negative_exponent,
                               SeededRng rng)
    : interactions_(interactions), rng_(rng) {
  if (interactions.train_pairs().empty()) {
    throw Error(ErrorCode::Data, "triplet sampler: no training interactions");
  }
  double total = 0.0;
  for (int item = 0; item < interactions.n_items(); ++item) {
    const auto freq = interactions.train_item_freq()[static_cast<std::size_t>(item)];
    if (freq <= 0 || !interactions.is_train_item(item)) continue;
    total += std::pow(static_cast<double>(freq), negative_exponent);
    items_.push_back(item);
    cumulative_.push_back(total);
  }
}

TripletSampler::Triplet TripletSampler::sample() {
  const auto pairs = interactions_.train_pairs();
  const auto& [user, positive] = pairs[static_cast<std::size_t>(rng_.next_below(pairs.size()))];
  const auto& user_positives = interactions_.positives_of(user);
  const double total = cumulative_.back();
  for (int attempt = 0; attempt < kMaxNegativeAttempts; ++attempt) {
    const double u = rng_.next_unit() * total;
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const auto idx = static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        it - cumulative_.begin(), static_cast<std::ptrdiff_t>(items_.size()) - 1));
    const int candidate = items_[idx];
    if (!user_positives.contains(candidate)) return {user, positive, candidate};
  }
  throw Error(ErrorCode::Data, "triplet sampler: no negative found for user '" +
                                   interactions_.user_ids()[static_cast<std::size_t>(user)] +
                                   "' after " + std::to_string(kMaxNegativeAttempts) + " attempts");
}

}  // namespace ter
