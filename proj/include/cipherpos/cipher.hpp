#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cipherpos/brown.hpp"
#include "cipherpos/poslm.hpp"

namespace cipherpos {

// Row-stochastic substitution table P(cluster | tag).
struct CipherTable {
  std::vector<std::string> tags;
  std::vector<int> clusters;  // cluster IDs, one per column
  std::vector<double> probs;  // row-major, tags.size() x clusters.size()

  CipherTable() = default;
  CipherTable(std::vector<std::string> tags, std::vector<int> clusters);

  std::size_t num_tags() const { return tags.size(); }
  std::size_t num_clusters() const { return clusters.size(); }
  double& at(std::size_t tag, std::size_t column) { return probs[tag * clusters.size() + column]; }
  double at(std::size_t tag, std::size_t column) const {
    return probs[tag * clusters.size() + column];
  }

  // Column of a cluster ID, or -1.
  int column_of(int cluster) const;

  bool operator==(const CipherTable&) const = default;
};

struct DeciphermentResult {
  CipherTable table;
  double log_likelihood = 0.0;
  double perplexity = 0.0;
  int iterations_run = 0;
  std::uint64_t restart_seed = 0;
  // LL of the initial table followed by the LL after each iteration.
  std::vector<double> log_likelihood_trace;

  bool operator==(const DeciphermentResult&) const = default;
};

struct EmOptions {
  int max_iterations = 500;
  double tol = 1e-6;
  double emission_floor = 1e-10;
  int workers = 1;
};

// Tag-to-tag transition probabilities read off a bigram (or unigram) LM.
struct TagTransitions {
  std::size_t num_tags = 0;
  std::vector<double> start;  // P(t | BOS)
  std::vector<double> trans;  // P(t' | t), row-major
  std::vector<double> end;    // P(EOS | t)
  double empty = 0.0;         // P(EOS | BOS)
};
TagTransitions transitions_from(const PosLanguageModel& lm);

// Rows drawn from a symmetric Dirichlet(1), deterministic in `seed`.
CipherTable init_table(const std::vector<std::string>& tags, const std::vector<int>& clusters,
                       std::uint64_t seed);

DeciphermentResult em_train(const ClusterCorpus& corpus, const PosLanguageModel& lm,
                            CipherTable table, const EmOptions& options = {});

// Restart r uses seed master_seed + r; the lowest-perplexity run wins, ties
// going to the lower seed.
DeciphermentResult train_with_restarts(const ClusterCorpus& corpus, const PosLanguageModel& lm,
                                       const std::vector<int>& clusters, int n_restarts,
                                       std::uint64_t master_seed, const EmOptions& options = {});

// Forward-algorithm log P(clusters), marginalised over tag sequences.
double corpus_log_likelihood(const ClusterCorpus& corpus, const PosLanguageModel& lm,
                             const CipherTable& table, int workers = 1);
// exp(-LL / N) with N = tokens + one EOS per sentence.
double corpus_perplexity(const ClusterCorpus& corpus, const PosLanguageModel& lm,
                         const CipherTable& table, int workers = 1);
std::int64_t perplexity_events(const ClusterCorpus& corpus);

// argmax_p P(clusters | p) P(p); ties go to the lower tag index.
std::vector<int> viterbi_decode_indices(const ClusterSequence& sequence,
                                        const PosLanguageModel& lm, const CipherTable& table);
TagSequence viterbi_decode(const ClusterSequence& sequence, const PosLanguageModel& lm,
                           const CipherTable& table);

// Table file: `#tags=`, `#clusters=` headers, optional `#key=value`
// metadata, then `tag<TAB>clusterID<TAB>probability` rows.
std::string write_table(const CipherTable& table,
                        const std::vector<std::pair<std::string, std::string>>& headers = {});
std::string write_result(const DeciphermentResult& result,
                         const std::vector<std::pair<std::string, std::string>>& headers = {});
CipherTable parse_table(const std::vector<std::string>& lines,
                        const std::string& source = "<memory>");
CipherTable load_table(const std::filesystem::path& path);

}  // namespace cipherpos
