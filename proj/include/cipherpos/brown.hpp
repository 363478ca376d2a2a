#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cipherpos/corpus.hpp"

namespace cipherpos {

// Word -> cluster ID mapping produced by hierarchical Brown clustering.
// Cluster IDs are 0..num_clusters-1, ordered by bit path; words below the
// frequency cutoff (and any word unseen at training time) map to
// unk_cluster() == num_clusters.
struct Clustering {
  int num_clusters = 0;
  std::vector<std::string> paths;                    // cluster ID -> bit path
  std::map<std::string, int> assignment;             // includes UNK-mapped words
  std::map<std::string, std::int64_t> frequency;

  int unk_cluster() const { return num_clusters; }
  int cluster_of(const std::string& word) const;

  // Cluster alphabet including the reserved unk cluster: 0..num_clusters.
  std::vector<int> alphabet() const;
};

using ClusterSequence = std::vector<int>;
using ClusterCorpus = std::vector<ClusterSequence>;

struct BrownOptions {
  int num_clusters = 500;
  std::int64_t min_count = 1;
};

// Observation hook for training. `classes_before` maps every word currently
// introduced into the merge window to its slot; it is only filled when a
// listener is attached.
struct MergeEvent {
  enum class Phase { Window, Hierarchy };
  Phase phase = Phase::Window;
  int slot_a = 0;  // survives; slot_a < slot_b
  int slot_b = 0;
  double loss = 0.0;
  double objective_after = 0.0;
  std::map<std::string, int> classes_before;
};
using MergeListener = std::function<void(const MergeEvent&)>;

Clustering train_brown(const TokenizedCorpus& corpus, const BrownOptions& options,
                       const MergeListener& listener = {});

// Average mutual information of adjacent class pairs (natural log), with
// bigrams taken inside sentences only.
double mutual_information(const Clustering& clustering, const TokenizedCorpus& corpus);

// Same objective over a partial class map: only bigrams with both ends
// classed enter the joint terms, while N and the left/right marginals of a
// class count every bigram, classed neighbour or not. With a complete map
// this is the ordinary class-bigram mutual information.
double partial_mutual_information(const std::map<std::string, int>& classes,
                                  const TokenizedCorpus& corpus);

ClusterCorpus assign_clusters(const TokenizedCorpus& corpus, const Clustering& clustering);

// Cluster file: `bitpath<TAB>word<TAB>frequency`, UNK-mapped words use the
// path "UNK". '#' header lines at the top are carried in `headers`.
std::string write_clusters(const Clustering& clustering,
                           const std::vector<std::pair<std::string, std::string>>& headers = {});
Clustering parse_clusters(const std::vector<std::string>& lines,
                          const std::string& source = "<memory>");
Clustering load_clusters(const std::filesystem::path& path);

}  // namespace cipherpos
