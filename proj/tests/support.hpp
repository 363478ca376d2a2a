#pragma once

// Test-only oracles and generators. Nothing here calls into the code paths
// it is used to check: enumeration replaces dynamic programming, raw bigram
// counting replaces the incremental Brown bookkeeping, and a Jacobi sweep
// replaces the library eigensolver.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cipherpos/cipher.hpp"
#include "cipherpos/corpus.hpp"
#include "cipherpos/poslm.hpp"

namespace cipherpos::testing {

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("cipherpos_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// All tag-index sequences of a given length over `num_tags` tags.
inline void for_each_sequence(std::size_t length, std::size_t num_tags,
                              const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> seq(length, 0);
  while (true) {
    fn(seq);
    std::size_t pos = 0;
    while (pos < length && ++seq[pos] == static_cast<int>(num_tags)) seq[pos++] = 0;
    if (pos == length) break;
  }
}

// log P(p) P(c | p) computed straight from the LM's sequence scorer and the
// table, with no transition matrix in between.
inline double joint_log_prob(const std::vector<int>& tags, const ClusterSequence& clusters,
                             const PosLanguageModel& lm, const CipherTable& table) {
  TagSequence names;
  double emit = 0.0;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    names.push_back(lm.tagset()[tags[i]]);
    emit += std::log(table.at(tags[i], table.column_of(clusters[i])));
  }
  return sequence_log_prob(lm, names) + emit;
}

inline double brute_log_marginal(const ClusterSequence& clusters, const PosLanguageModel& lm,
                                 const CipherTable& table) {
  double total = 0.0;
  for_each_sequence(clusters.size(), lm.tagset().size(), [&](const std::vector<int>& tags) {
    total += std::exp(joint_log_prob(tags, clusters, lm, table));
  });
  return std::log(total);
}

// Highest-scoring sequence; the enumeration order is lexicographic from the
// last position, so ties are resolved separately by the caller if needed.
inline std::pair<std::vector<int>, double> brute_argmax(const ClusterSequence& clusters,
                                                        const PosLanguageModel& lm,
                                                        const CipherTable& table) {
  std::vector<int> best;
  double best_score = -std::numeric_limits<double>::infinity();
  for_each_sequence(clusters.size(), lm.tagset().size(), [&](const std::vector<int>& tags) {
    double s = joint_log_prob(tags, clusters, lm, table);
    if (best.empty() || s > best_score) {
      best_score = s;
      best = tags;
    }
  });
  return {best, best_score};
}

// Every tag sequence scoring within `tol` of the best. Distinct paths can
// share the same multiset of factors, so the argmax is not always unique.
inline std::vector<std::vector<int>> brute_optimal_paths(const ClusterSequence& clusters,
                                                         const PosLanguageModel& lm,
                                                         const CipherTable& table,
                                                         double tol = 1e-12) {
  const double best = brute_argmax(clusters, lm, table).second;
  std::vector<std::vector<int>> out;
  for_each_sequence(clusters.size(), lm.tagset().size(), [&](const std::vector<int>& tags) {
    if (joint_log_prob(tags, clusters, lm, table) >= best - tol) out.push_back(tags);
  });
  return out;
}

// Class-bigram mutual information from raw counts over a (possibly partial)
// class map; marginals count every bigram a class takes part in.
inline double raw_partial_mi(const std::map<std::string, int>& classes,
                             const TokenizedCorpus& corpus) {
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> left, right;
  double n = 0.0;
  for (const auto& s : corpus.sentences) {
    for (std::size_t i = 1; i < s.size(); ++i) {
      n += 1.0;
      auto a = classes.find(s[i - 1]);
      auto b = classes.find(s[i]);
      if (a != classes.end()) left[a->second] += 1.0;
      if (b != classes.end()) right[b->second] += 1.0;
      if (a != classes.end() && b != classes.end()) joint[{a->second, b->second}] += 1.0;
    }
  }
  double mi = 0.0;
  for (const auto& [k, c] : joint) {
    const double pxy = c / n, px = left[k.first] / n, py = right[k.second] / n;
    mi += pxy * std::log(pxy / (px * py));
  }
  return mi;
}

// Symmetric eigendecomposition by cyclic Jacobi rotations. Returns
// eigenvalues descending with matching unit eigenvectors (as rows).
inline std::pair<std::vector<double>, std::vector<std::vector<double>>> jacobi_eigen(
    std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-26) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return a[x][x] > a[y][y]; });
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
  for (auto i : order) {
    values.push_back(a[i][i]);
    std::vector<double> col(n);
    for (std::size_t k = 0; k < n; ++k) col[k] = v[k][i];
    vectors.push_back(col);
  }
  return {values, vectors};
}

inline double uniform01(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline std::size_t sample(const std::vector<double>& probs, std::mt19937_64& rng) {
  double u = uniform01(rng), acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

inline std::vector<double> random_simplex(std::size_t n, std::mt19937_64& rng) {
  std::vector<double> out(n);
  double sum = 0.0;
  for (auto& x : out) {
    x = -std::log(1.0 - uniform01(rng));
    sum += x;
  }
  for (auto& x : out) x /= sum;
  return out;
}

inline std::vector<std::string> tag_names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("T" + std::to_string(i));
  return out;
}

// Random bigram LM over n tags with counts from random sequences.
inline PosLanguageModel random_lm(std::size_t num_tags, std::mt19937_64& rng, double alpha = 0.5,
                                  int sequences = 20) {
  std::vector<TagSequence> seqs;
  const auto names = tag_names(num_tags);
  for (int s = 0; s < sequences; ++s) {
    TagSequence seq;
    const int len = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < len; ++i) seq.push_back(names[rng() % num_tags]);
    seqs.push_back(seq);
  }
  return train_pos_lm(seqs, {2, alpha}, names);
}

inline CipherTable random_table(std::size_t num_tags, std::size_t num_clusters,
                                std::mt19937_64& rng) {
  std::vector<int> clusters(num_clusters);
  for (std::size_t c = 0; c < num_clusters; ++c) clusters[c] = static_cast<int>(c);
  CipherTable table(tag_names(num_tags), clusters);
  for (std::size_t t = 0; t < num_tags; ++t) {
    auto row = random_simplex(num_clusters, rng);
    for (std::size_t c = 0; c < num_clusters; ++c) table.at(t, c) = row[c];
  }
  return table;
}

// Planted cipher: a 5-tag bigram source, 20 clusters, each tag owning four
// clusters that receive `diagonal` of its emission mass (the rest spread
// evenly over the other 16).
struct SyntheticCipher {
  std::vector<std::vector<int>> gold_tags;
  ClusterCorpus clusters;
  PosLanguageModel lm;  // trained on an independent sample of the source
  CipherTable true_table;
};

inline const std::vector<std::vector<double>>& synthetic_source() {
  // Rows: BOS, T0..T4; columns: T0..T4, EOS.
  static const std::vector<std::vector<double>> rows = {
      {0.60, 0.05, 0.05, 0.25, 0.05, 0.00},  // BOS
      {0.02, 0.85, 0.05, 0.03, 0.05, 0.00},  // T0
      {0.05, 0.05, 0.70, 0.05, 0.10, 0.05},  // T1
      {0.40, 0.05, 0.05, 0.35, 0.05, 0.10},  // T2
      {0.10, 0.60, 0.05, 0.05, 0.10, 0.10},  // T3
      {0.05, 0.05, 0.05, 0.05, 0.05, 0.75},  // T4
  };
  return rows;
}

inline std::vector<std::vector<int>> sample_tag_sequences(std::size_t tokens,
                                                          std::mt19937_64& rng) {
  const auto& src = synthetic_source();
  std::vector<std::vector<int>> out;
  std::size_t total = 0;
  while (total < tokens) {
    std::vector<int> seq;
    std::size_t prev = 0;  // BOS row
    while (true) {
      std::size_t next = sample(src[prev], rng);
      if (next == 5 || seq.size() >= 60) break;
      seq.push_back(static_cast<int>(next));
      prev = next + 1;
    }
    if (seq.empty()) continue;
    total += seq.size();
    out.push_back(seq);
  }
  return out;
}

inline SyntheticCipher make_synthetic(std::uint64_t seed, std::size_t tokens = 10000,
                                      double diagonal = 0.9) {
  std::mt19937_64 rng(seed);
  SyntheticCipher out;
  const auto names = tag_names(5);
  std::vector<int> ids(20);
  for (int c = 0; c < 20; ++c) ids[c] = c;
  out.true_table = CipherTable(names, ids);
  for (std::size_t t = 0; t < 5; ++t) {
    for (std::size_t c = 0; c < 20; ++c) {
      out.true_table.at(t, c) = (c / 4 == t) ? diagonal / 4.0 : (1.0 - diagonal) / 16.0;
    }
  }
  out.gold_tags = sample_tag_sequences(tokens, rng);
  for (const auto& seq : out.gold_tags) {
    ClusterSequence cs;
    for (int t : seq) {
      std::vector<double> row(20);
      for (std::size_t c = 0; c < 20; ++c) row[c] = out.true_table.at(t, c);
      cs.push_back(static_cast<int>(sample(row, rng)));
    }
    out.clusters.push_back(cs);
  }
  std::vector<TagSequence> parent;
  for (const auto& seq : sample_tag_sequences(tokens, rng)) {
    TagSequence names_seq;
    for (int t : seq) names_seq.push_back(names[t]);
    parent.push_back(names_seq);
  }
  out.lm = train_pos_lm(parent, {2, 0.1}, names);
  return out;
}

inline double decode_accuracy(const SyntheticCipher& syn, const CipherTable& table) {
  std::size_t correct = 0, total = 0;
  for (std::size_t s = 0; s < syn.clusters.size(); ++s) {
    auto decoded = viterbi_decode_indices(syn.clusters[s], syn.lm, table);
    for (std::size_t i = 0; i < decoded.size(); ++i) {
      correct += decoded[i] == syn.gold_tags[s][i];
      ++total;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace cipherpos::testing
