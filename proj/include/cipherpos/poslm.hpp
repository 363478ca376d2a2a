#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cipherpos/corpus.hpp"

namespace cipherpos {

// Additive-smoothed n-gram model over POS tags.
//
// Symbols are tag indices 0..T-1, plus EOS (== T, predicted) and BOS
// (== T+1, context only). Every sequence is padded with order-1 BOS on the
// left and one EOS on the right, and
//
//   P(t | h) = (count(h, t) + alpha) / (count(h) + alpha * V),  V = T + 1.
//
// Unseen histories therefore get the uniform distribution 1/V.
class PosLanguageModel {
 public:
  using History = std::vector<int>;

  PosLanguageModel() = default;
  PosLanguageModel(int order, double alpha, std::vector<std::string> tagset);

  int order() const { return order_; }
  double alpha() const { return alpha_; }
  const std::vector<std::string>& tagset() const { return tagset_; }
  int num_tags() const { return static_cast<int>(tagset_.size()); }
  int vocab_size() const { return num_tags() + 1; }
  int eos() const { return num_tags(); }
  int bos() const { return num_tags() + 1; }

  // Index of `tag` in the tagset, or -1.
  int tag_index(const std::string& tag) const;

  void add_count(const History& history, int symbol, std::int64_t count);
  std::int64_t count(const History& history, int symbol) const;
  std::int64_t history_count(const History& history) const;

  double prob(const History& history, int symbol) const;
  double log_prob(const History& history, int symbol) const;

  // Counts as stored: history -> per-symbol counts (size V).
  const std::map<History, std::vector<std::int64_t>>& counts() const { return counts_; }

  // Same counts re-indexed onto a superset tagset (new tags get zero counts).
  PosLanguageModel with_tagset(const std::vector<std::string>& tagset) const;

  bool operator==(const PosLanguageModel&) const = default;

 private:
  int order_ = 2;
  double alpha_ = 0.1;
  std::vector<std::string> tagset_;
  std::map<History, std::vector<std::int64_t>> counts_;
  std::map<History, std::int64_t> totals_;
};

struct LmOptions {
  int order = 2;
  double alpha = 0.1;
};

// Tagset is first-occurrence order over `sequences` unless `tagset` is given,
// in which case every tag must belong to it.
PosLanguageModel train_pos_lm(const std::vector<TagSequence>& sequences,
                              const LmOptions& options = {},
                              const std::vector<std::string>& tagset = {});

// Trains on the flattened per-parent sequence lists.
PosLanguageModel concat_train(const std::vector<std::vector<TagSequence>>& parents,
                              const LmOptions& options = {},
                              const std::vector<std::string>& tagset = {});

// Sums the counts of models that share order and alpha; the tagset is the
// union in first-occurrence order. Equivalent to concat_train on the
// sequences the models were trained from.
PosLanguageModel merge_lms(const std::vector<PosLanguageModel>& models);

double sequence_log_prob(const PosLanguageModel& model, const TagSequence& sequence);
double corpus_log_prob(const PosLanguageModel& model, const std::vector<TagSequence>& sequences);
// exp(-LL / N), N counting one EOS event per sequence.
double lm_perplexity(const PosLanguageModel& model, const std::vector<TagSequence>& sequences);

// LM file: `#order=`, `#alpha=`, `#tags=` headers, then
// `history<TAB>symbol<TAB>count` rows. History symbols are space separated;
// BOS is written `<s>` and EOS `</s>`.
std::string write_lm(const PosLanguageModel& model,
                     const std::vector<std::pair<std::string, std::string>>& headers = {});
PosLanguageModel parse_lm(const std::vector<std::string>& lines,
                          const std::string& source = "<memory>");
PosLanguageModel load_lm(const std::filesystem::path& path);

}  // namespace cipherpos
