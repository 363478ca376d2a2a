#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cipherpos/brown.hpp"
#include "cipherpos/cipher.hpp"
#include "cipherpos/corpus.hpp"
#include "cipherpos/poslm.hpp"

namespace cipherpos {

struct ProvenanceEntry {
  std::string parent;
  std::uint64_t restart_seed = 0;
  double perplexity = 0.0;
  double log_likelihood = 0.0;
  int iterations_run = 0;

  bool operator==(const ProvenanceEntry&) const = default;
};

// Clustering + cipher table + tag LM: everything needed to tag raw text.
struct GroundedTagger {
  Clustering clustering;
  CipherTable table;
  PosLanguageModel lm;
  std::vector<ProvenanceEntry> provenance;
};

struct NamedLm {
  std::string name;
  PosLanguageModel lm;
};

struct NamedTagCorpus {
  std::string name;
  std::vector<TagSequence> sequences;
};

struct GroundOptions {
  int restarts = 70;
  std::uint64_t seed = 42;
  EmOptions em;
  // When non-empty, fixes the tag order and every parent tag must be in it.
  std::vector<std::string> tagset;
};

GroundedTagger build_single_parent(const Clustering& clustering, const ClusterCorpus& corpus,
                                   const NamedLm& parent, const GroundOptions& options = {});

// Entrywise mean of tables sharing tag and cluster axes.
CipherTable average_tables(const std::vector<CipherTable>& tables);

// One cipher per parent (each with restarts, all from the same master seed),
// averaged, and paired with the LM over all parents' counts.
GroundedTagger build_cipher_avg(const Clustering& clustering, const ClusterCorpus& corpus,
                                const std::vector<NamedLm>& parents,
                                const GroundOptions& options = {});
GroundedTagger build_cipher_avg(const Clustering& clustering, const ClusterCorpus& corpus,
                                const std::vector<NamedTagCorpus>& parents,
                                const LmOptions& lm_options, const GroundOptions& options = {});

TaggedCorpus tag(const GroundedTagger& tagger, const TokenizedCorpus& corpus, int workers = 1);

// Directory with clusters.tsv, table.tsv, lm.tsv and provenance.tsv.
void save_bundle(const GroundedTagger& tagger, const std::filesystem::path& dir,
                 const std::vector<std::pair<std::string, std::string>>& headers = {});
GroundedTagger load_bundle(const std::filesystem::path& dir);

}  // namespace cipherpos
