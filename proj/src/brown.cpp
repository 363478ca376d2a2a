#include "cipherpos/brown.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "cipherpos/error.hpp"
#include "cipherpos/tsv.hpp"

namespace cipherpos {

int Clustering::cluster_of(const std::string& word) const {
  auto it = assignment.find(word);
  return it == assignment.end() ? unk_cluster() : it->second;
}

std::vector<int> Clustering::alphabet() const {
  std::vector<int> ids(static_cast<std::size_t>(num_clusters) + 1);
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

namespace {

// Greedy agglomerative clustering with a window of K+1 active classes.
// Merge losses for every active pair live in `loss_` and are updated in O(1)
// per pair after each merge or introduction, so a step costs O(K^2).
class BrownTrainer {
 public:
  BrownTrainer(const TokenizedCorpus& corpus, const BrownOptions& options,
               const MergeListener& listener)
      : k_(options.num_clusters), listener_(listener) {
    if (k_ < 1) throw InputError("cluster count must be positive");
    const std::int64_t min_count = std::max<std::int64_t>(options.min_count, 1);

    for (const auto& [word, count] : corpus.vocab) {
      if (count >= min_count) words_.push_back(word);
    }
    if (static_cast<int>(words_.size()) < k_) {
      throw InputError("only " + std::to_string(words_.size()) +
                       " word types with frequency >= " + std::to_string(min_count) +
                       ", need at least " + std::to_string(k_));
    }
    // Frequency descending, then lexicographic.
    std::stable_sort(words_.begin(), words_.end(), [&](const auto& a, const auto& b) {
      return corpus.vocab.at(a) > corpus.vocab.at(b);
    });
    std::unordered_map<std::string, int> index;
    for (std::size_t i = 0; i < words_.size(); ++i) index.emplace(words_[i], static_cast<int>(i));

    const std::size_t v = words_.size();
    word_left_.assign(v, 0.0);
    word_right_.assign(v, 0.0);
    std::vector<std::map<int, double>> succ(v), pred(v);
    total_ = 0.0;
    for (const auto& sentence : corpus.sentences) {
      for (std::size_t t = 0; t + 1 < sentence.size(); ++t) {
        total_ += 1.0;
        auto li = index.find(sentence[t]);
        auto ri = index.find(sentence[t + 1]);
        if (li != index.end()) word_left_[li->second] += 1.0;
        if (ri != index.end()) word_right_[ri->second] += 1.0;
        if (li != index.end() && ri != index.end()) {
          succ[li->second][ri->second] += 1.0;
          pred[ri->second][li->second] += 1.0;
        }
      }
    }
    succ_.resize(v);
    pred_.resize(v);
    for (std::size_t i = 0; i < v; ++i) {
      succ_[i].assign(succ[i].begin(), succ[i].end());
      pred_[i].assign(pred[i].begin(), pred[i].end());
    }

    slots_ = k_ + 1;
    n_.assign(static_cast<std::size_t>(slots_ * slots_), 0.0);
    loss_.assign(static_cast<std::size_t>(slots_ * slots_), 0.0);
    left_.assign(slots_, 0.0);
    right_.assign(slots_, 0.0);
    active_.assign(slots_, 0);
    members_.assign(slots_, {});
    word_slot_.assign(v, -1);
  }

  Clustering run(const TokenizedCorpus& corpus) {
    for (int r = 0; r < k_; ++r) introduce(r, r);
    int free_slot = k_;
    for (std::size_t r = k_; r < words_.size(); ++r) {
      introduce(static_cast<int>(r), free_slot);
      auto [a, b] = best_pair();
      merge(a, b, MergeEvent::Phase::Window);
      free_slot = b;
    }

    // The K survivors are the leaves; merge them down to one root to get
    // the bit paths.
    std::vector<int> leaf_slots;
    for (int s = 0; s < slots_; ++s) {
      if (active_[s]) leaf_slots.push_back(s);
    }
    struct Node {
      int left = -1;
      int right = -1;
    };
    std::vector<Node> nodes(leaf_slots.size());
    std::vector<int> node_of(slots_, -1);
    for (std::size_t i = 0; i < leaf_slots.size(); ++i) node_of[leaf_slots[i]] = static_cast<int>(i);
    std::vector<std::vector<int>> leaf_members;
    for (int s : leaf_slots) leaf_members.push_back(members_[s]);

    int root = leaf_slots.empty() ? -1 : node_of[leaf_slots[0]];
    for (std::size_t remaining = leaf_slots.size(); remaining > 1; --remaining) {
      auto [a, b] = best_pair();
      merge(a, b, MergeEvent::Phase::Hierarchy);
      nodes.push_back({node_of[a], node_of[b]});
      node_of[a] = static_cast<int>(nodes.size()) - 1;
      node_of[b] = -1;
      root = node_of[a];
    }

    std::vector<std::string> leaf_path(leaf_slots.size());
    if (leaf_slots.size() == 1) {
      leaf_path[0] = "0";
    } else {
      std::vector<std::pair<int, std::string>> stack{{root, ""}};
      while (!stack.empty()) {
        auto [node, path] = stack.back();
        stack.pop_back();
        if (nodes[node].left < 0) {
          leaf_path[node] = path;
        } else {
          stack.emplace_back(nodes[node].right, path + "1");
          stack.emplace_back(nodes[node].left, path + "0");
        }
      }
    }

    std::vector<std::size_t> order(leaf_slots.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return leaf_path[a] < leaf_path[b]; });

    Clustering out;
    out.num_clusters = static_cast<int>(leaf_slots.size());
    out.frequency = corpus.vocab;
    for (std::size_t id = 0; id < order.size(); ++id) {
      out.paths.push_back(leaf_path[order[id]]);
      for (int w : leaf_members[order[id]]) out.assignment[words_[w]] = static_cast<int>(id);
    }
    for (const auto& [word, count] : corpus.vocab) {
      out.assignment.emplace(word, out.unk_cluster());
    }
    return out;
  }

 private:
  double& n(int a, int b) { return n_[static_cast<std::size_t>(a * slots_ + b)]; }
  double& loss(int a, int b) { return loss_[static_cast<std::size_t>(a * slots_ + b)]; }

  double q(double count, double l, double r) const {
    if (count <= 0.0) return 0.0;
    return count / total_ * std::log(count * total_ / (l * r));
  }
  double term(int a, int b) { return q(n(a, b), left_[a], right_[b]); }

  // Change in the pair (i, j) merge loss contributed by third class w.
  double third_party(int i, int j, int w) {
    return term(i, w) + term(w, i) + term(j, w) + term(w, j) -
           q(n(i, w) + n(j, w), left_[i] + left_[j], right_[w]) -
           q(n(w, i) + n(w, j), left_[w], right_[i] + right_[j]);
  }

  double direct_loss(int i, int j) {
    double total = term(i, i) + term(j, j) + term(i, j) + term(j, i) -
                   q(n(i, i) + n(i, j) + n(j, i) + n(j, j), left_[i] + left_[j],
                     right_[i] + right_[j]);
    for (int w = 0; w < slots_; ++w) {
      if (active_[w] && w != i && w != j) total += third_party(i, j, w);
    }
    return total;
  }

  void set_loss(int i, int j, double value) { loss(std::min(i, j), std::max(i, j)) = value; }

  void introduce(int word, int slot) {
    word_slot_[word] = slot;
    members_[slot] = {word};
    left_[slot] = word_left_[word];
    right_[slot] = word_right_[word];
    for (int s = 0; s < slots_; ++s) {
      n(slot, s) = 0.0;
      n(s, slot) = 0.0;
    }
    for (const auto& [other, count] : succ_[word]) {
      int s = word_slot_[other];
      if (s >= 0) n(slot, s) += count;
    }
    for (const auto& [other, count] : pred_[word]) {
      int s = word_slot_[other];
      if (s >= 0 && other != word) n(s, slot) += count;
    }

    for_each_active_pair([&](int i, int j) { loss(i, j) += third_party(i, j, slot); });
    objective_ += term(slot, slot);
    for (int s = 0; s < slots_; ++s) {
      if (active_[s]) objective_ += term(slot, s) + term(s, slot);
    }
    active_[slot] = 1;
    for (int s = 0; s < slots_; ++s) {
      if (active_[s] && s != slot) set_loss(s, slot, direct_loss(s, slot));
    }
  }

  template <typename F>
  void for_each_active_pair(F&& f) {
    for (int i = 0; i < slots_; ++i) {
      if (!active_[i]) continue;
      for (int j = i + 1; j < slots_; ++j) {
        if (active_[j]) f(i, j);
      }
    }
  }

  std::pair<int, int> best_pair() {
    double best = std::numeric_limits<double>::infinity();
    std::pair<int, int> arg{-1, -1};
    for_each_active_pair([&](int i, int j) {
      if (loss(i, j) < best) {
        best = loss(i, j);
        arg = {i, j};
      }
    });
    if (arg.first < 0) throw InvariantError("no active pair to merge");
    return arg;
  }

  void merge(int a, int b, MergeEvent::Phase phase) {
    MergeEvent event;
    if (listener_) {
      event.phase = phase;
      event.slot_a = a;
      event.slot_b = b;
      event.loss = loss(a, b);
      for (int s = 0; s < slots_; ++s) {
        if (!active_[s]) continue;
        for (int w : members_[s]) event.classes_before.emplace(words_[w], s);
      }
    }

    objective_ -= loss(a, b);
    for_each_active_pair([&](int i, int j) {
      if (i == a || i == b || j == a || j == b) return;
      loss(i, j) -= third_party(i, j, a) + third_party(i, j, b);
    });

    n(a, a) = n(a, a) + n(a, b) + n(b, a) + n(b, b);
    for (int s = 0; s < slots_; ++s) {
      if (s == a || s == b) continue;
      n(a, s) += n(b, s);
      n(s, a) += n(s, b);
    }
    for (int s = 0; s < slots_; ++s) {
      n(b, s) = 0.0;
      n(s, b) = 0.0;
    }
    left_[a] += left_[b];
    right_[a] += right_[b];
    left_[b] = right_[b] = 0.0;
    for (int w : members_[b]) word_slot_[w] = a;
    members_[a].insert(members_[a].end(), members_[b].begin(), members_[b].end());
    members_[b].clear();
    active_[b] = 0;

    for_each_active_pair([&](int i, int j) {
      if (i == a || j == a) return;
      loss(i, j) += third_party(i, j, a);
    });
    for (int s = 0; s < slots_; ++s) {
      if (active_[s] && s != a) set_loss(s, a, direct_loss(s, a));
    }

    if (listener_) {
      event.objective_after = objective_;
      listener_(event);
    }
  }

  int k_;
  const MergeListener& listener_;
  std::vector<std::string> words_;
  std::vector<double> word_left_, word_right_;
  std::vector<std::vector<std::pair<int, double>>> succ_, pred_;
  double total_ = 0.0;

  int slots_ = 0;
  std::vector<double> n_, loss_;
  std::vector<double> left_, right_;
  std::vector<char> active_;
  std::vector<std::vector<int>> members_;
  std::vector<int> word_slot_;
  double objective_ = 0.0;
};

}  // namespace

Clustering train_brown(const TokenizedCorpus& corpus, const BrownOptions& options,
                       const MergeListener& listener) {
  BrownTrainer trainer(corpus, options, listener);
  return trainer.run(corpus);
}

double partial_mutual_information(const std::map<std::string, int>& classes,
                                  const TokenizedCorpus& corpus) {
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> left, right;
  double total = 0.0;
  for (const auto& sentence : corpus.sentences) {
    for (std::size_t t = 0; t + 1 < sentence.size(); ++t) {
      total += 1.0;
      auto a = classes.find(sentence[t]);
      auto b = classes.find(sentence[t + 1]);
      if (a != classes.end()) left[a->second] += 1.0;
      if (b != classes.end()) right[b->second] += 1.0;
      if (a != classes.end() && b != classes.end()) joint[{a->second, b->second}] += 1.0;
    }
  }
  double mi = 0.0;
  for (const auto& [pair, count] : joint) {
    mi += count / total * std::log(count * total / (left[pair.first] * right[pair.second]));
  }
  return mi;
}

double mutual_information(const Clustering& clustering, const TokenizedCorpus& corpus) {
  std::map<std::string, int> classes;
  for (const auto& [word, count] : corpus.vocab) classes.emplace(word, clustering.cluster_of(word));
  // Guard the tiny negative values rounding can produce for independent data.
  return std::max(0.0, partial_mutual_information(classes, corpus));
}

ClusterCorpus assign_clusters(const TokenizedCorpus& corpus, const Clustering& clustering) {
  ClusterCorpus out;
  out.reserve(corpus.sentences.size());
  for (const auto& sentence : corpus.sentences) {
    ClusterSequence ids;
    ids.reserve(sentence.size());
    for (const auto& word : sentence) ids.push_back(clustering.cluster_of(word));
    out.push_back(std::move(ids));
  }
  return out;
}

std::string write_clusters(const Clustering& clustering,
                           const std::vector<std::pair<std::string, std::string>>& headers) {
  std::string out;
  for (const auto& [key, value] : headers) out += "#" + key + "=" + value + "\n";

  struct Row {
    int id;
    std::int64_t freq;
    const std::string* word;
  };
  std::vector<Row> rows;
  for (const auto& [word, id] : clustering.assignment) {
    auto f = clustering.frequency.find(word);
    rows.push_back({id, f == clustering.frequency.end() ? 0 : f->second, &word});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.id != b.id) return a.id < b.id;
    if (a.freq != b.freq) return a.freq > b.freq;
    return *a.word < *b.word;
  });
  for (const auto& row : rows) {
    out += row.id == clustering.unk_cluster() ? std::string("UNK") : clustering.paths.at(row.id);
    out += '\t';
    out += *row.word;
    out += '\t';
    out += std::to_string(row.freq);
    out += '\n';
  }
  return out;
}

Clustering parse_clusters(const std::vector<std::string>& lines, const std::string& source) {
  struct Row {
    std::string path, word;
    std::int64_t freq;
  };
  std::vector<Row> rows;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (line.empty() || line[0] == '#') continue;
    auto fields = tsv::split(line, '\t');
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty()) {
      throw InputError(source + ":" + std::to_string(i + 1) +
                       ": expected bitpath<TAB>word<TAB>frequency");
    }
    rows.push_back({fields[0], fields[1], tsv::parse_int(fields[2], "frequency")});
  }
  if (rows.empty()) throw InputError("no cluster rows in " + source);

  Clustering c;
  for (const auto& row : rows) {
    if (row.path != "UNK") c.paths.push_back(row.path);
  }
  std::sort(c.paths.begin(), c.paths.end());
  c.paths.erase(std::unique(c.paths.begin(), c.paths.end()), c.paths.end());
  c.num_clusters = static_cast<int>(c.paths.size());
  if (c.num_clusters == 0) throw InputError("cluster file has only UNK rows: " + source);
  std::map<std::string, int> id_of;
  for (std::size_t i = 0; i < c.paths.size(); ++i) id_of[c.paths[i]] = static_cast<int>(i);
  for (const auto& row : rows) {
    int id = row.path == "UNK" ? c.unk_cluster() : id_of.at(row.path);
    if (!c.assignment.emplace(row.word, id).second) {
      throw InputError("word listed twice in " + source + ": " + row.word);
    }
    c.frequency[row.word] = row.freq;
  }
  return c;
}

Clustering load_clusters(const std::filesystem::path& path) {
  return parse_clusters(tsv::read_lines(path), path.string());
}

}  // namespace cipherpos
