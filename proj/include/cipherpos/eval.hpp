#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cipherpos/brown.hpp"
#include "cipherpos/corpus.hpp"

namespace cipherpos {

struct TagScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t gold = 0;
  std::int64_t predicted = 0;
  std::int64_t correct = 0;
};

struct EvalReport {
  double accuracy = 0.0;
  std::optional<double> many_to_one;
  std::vector<std::string> tags;  // gold tagset first, then predicted-only tags
  std::map<std::string, TagScores> per_tag;
  std::vector<std::vector<std::int64_t>> confusion;  // [gold][predicted] over `tags`
  std::int64_t n_tokens = 0;
};

struct ManyToOne {
  std::map<int, std::string> mapping;
  double accuracy = 0.0;
};

// Maps each cluster to its most frequent gold tag (ties: smallest tag).
ManyToOne many_to_one(const ClusterCorpus& clusters, const TaggedCorpus& gold);

EvalReport tag_accuracy(const TaggedCorpus& predicted, const TaggedCorpus& gold,
                        bool check_words = false);

TagScores per_tag_prf(const TaggedCorpus& predicted, const TaggedCorpus& gold,
                      const std::string& tag);

struct GroupedPoint {
  std::string group;
  double x = 0.0;
  double y = 0.0;
};

double pearson(const std::vector<double>& x, const std::vector<double>& y);

// z-normalises x within each group (population standard deviation), pools
// all points and returns the Pearson correlation of the pooled (x, y).
double znorm_pearson(const std::vector<GroupedPoint>& points);

// Sections SUMMARY, PER_TAG and CONFUSION, each introduced by `#section=`.
std::string write_report(const EvalReport& report,
                         const std::vector<std::pair<std::string, std::string>>& headers = {});

// Fraction rendered as percentage points with two decimals, e.g. "56.40".
std::string percent(double fraction);

}  // namespace cipherpos
