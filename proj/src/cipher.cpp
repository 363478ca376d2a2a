#include "cipherpos/cipher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_map>

#include "cipherpos/error.hpp"
#include "cipherpos/parallel.hpp"
#include "cipherpos/tsv.hpp"

namespace cipherpos {

namespace {

// Sentences per E-step work unit. Partial counts are summed in chunk order,
// which keeps results identical for any worker count.
constexpr std::size_t kChunkSentences = 64;

using ColumnCorpus = std::vector<std::vector<int>>;

ColumnCorpus to_columns(const ClusterCorpus& corpus, const CipherTable& table) {
  std::unordered_map<int, int> column;
  for (std::size_t c = 0; c < table.clusters.size(); ++c) {
    column.emplace(table.clusters[c], static_cast<int>(c));
  }
  ColumnCorpus out;
  out.reserve(corpus.size());
  for (const auto& sentence : corpus) {
    std::vector<int> cols;
    cols.reserve(sentence.size());
    for (int id : sentence) {
      auto it = column.find(id);
      if (it == column.end()) {
        throw InputError("cluster ID " + std::to_string(id) + " absent from cipher table");
      }
      cols.push_back(it->second);
    }
    out.push_back(std::move(cols));
  }
  return out;
}

void check_tags(const PosLanguageModel& lm, const CipherTable& table) {
  if (lm.tagset() != table.tags) {
    throw InputError("cipher table tags do not match the language model tagset");
  }
}

// Uniform in the open interval (0, 1), independent of library distributions.
double open_unit(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

struct Accumulator {
  double log_likelihood = 0.0;
  std::vector<double> counts;  // tags x columns, empty when not collecting
};

// Scaled forward-backward over one sentence. Adds posterior tag/cluster
// counts to `acc.counts` when non-empty and returns log P(sentence).
class ForwardBackward {
 public:
  ForwardBackward(const TagTransitions& tr, const CipherTable& table)
      : tr_(tr), table_(table), t_(tr.num_tags) {}

  double run(const std::vector<int>& obs, std::vector<double>* counts) {
    const std::size_t n = obs.size();
    if (n == 0) return std::log(tr_.empty);
    alpha_.assign(n * t_, 0.0);
    scale_.assign(n, 0.0);

    for (std::size_t j = 0; j < t_; ++j) alpha_[j] = tr_.start[j] * table_.at(j, obs[0]);
    normalize(0);
    for (std::size_t pos = 1; pos < n; ++pos) {
      const double* prev = &alpha_[(pos - 1) * t_];
      double* cur = &alpha_[pos * t_];
      for (std::size_t i = 0; i < t_; ++i) {
        const double a = prev[i];
        if (a == 0.0) continue;
        const double* row = &tr_.trans[i * t_];
        for (std::size_t j = 0; j < t_; ++j) cur[j] += a * row[j];
      }
      for (std::size_t j = 0; j < t_; ++j) cur[j] *= table_.at(j, obs[pos]);
      normalize(pos);
    }
    double end_scale = 0.0;
    const double* last = &alpha_[(n - 1) * t_];
    for (std::size_t i = 0; i < t_; ++i) end_scale += last[i] * tr_.end[i];
    if (!(end_scale > 0.0)) throw InputError("sentence has zero probability under the cipher model");

    double ll = std::log(end_scale);
    for (double c : scale_) ll += std::log(c);
    if (counts == nullptr) return ll;

    beta_.assign(t_, 0.0);
    next_.assign(t_, 0.0);
    for (std::size_t i = 0; i < t_; ++i) beta_[i] = tr_.end[i] / end_scale;
    for (std::size_t pos = n; pos-- > 0;) {
      const double* a = &alpha_[pos * t_];
      const int col = obs[pos];
      for (std::size_t i = 0; i < t_; ++i) {
        (*counts)[i * table_.num_clusters() + col] += a[i] * beta_[i];
      }
      if (pos == 0) break;
      // beta_{pos-1}(i) = sum_j P(j|i) e(j, o_pos) beta_pos(j) / c_pos
      for (std::size_t j = 0; j < t_; ++j) {
        next_[j] = table_.at(j, col) * beta_[j] / scale_[pos];
      }
      for (std::size_t i = 0; i < t_; ++i) {
        const double* row = &tr_.trans[i * t_];
        double s = 0.0;
        for (std::size_t j = 0; j < t_; ++j) s += row[j] * next_[j];
        beta_[i] = s;
      }
    }
    return ll;
  }

 private:
  void normalize(std::size_t pos) {
    double* a = &alpha_[pos * t_];
    double s = 0.0;
    for (std::size_t j = 0; j < t_; ++j) s += a[j];
    if (!(s > 0.0)) throw InputError("sentence has zero probability under the cipher model");
    for (std::size_t j = 0; j < t_; ++j) a[j] /= s;
    scale_[pos] = s;
  }

  const TagTransitions& tr_;
  const CipherTable& table_;
  std::size_t t_;
  std::vector<double> alpha_, scale_, beta_, next_;
};

// One E-step over the whole corpus with a fixed-order chunk reduction.
Accumulator expectation(const ColumnCorpus& corpus, const TagTransitions& tr,
                        const CipherTable& table, bool collect, int workers) {
  const std::size_t n_chunks = (corpus.size() + kChunkSentences - 1) / kChunkSentences;
  const std::size_t cells = table.num_tags() * table.num_clusters();
  std::vector<Accumulator> partial(n_chunks);
  parallel_for(n_chunks, workers, [&](std::size_t chunk) {
    Accumulator& acc = partial[chunk];
    if (collect) acc.counts.assign(cells, 0.0);
    ForwardBackward fb(tr, table);
    const std::size_t begin = chunk * kChunkSentences;
    const std::size_t end = std::min(corpus.size(), begin + kChunkSentences);
    for (std::size_t s = begin; s < end; ++s) {
      acc.log_likelihood += fb.run(corpus[s], collect ? &acc.counts : nullptr);
    }
  });
  Accumulator total;
  if (collect) total.counts.assign(cells, 0.0);
  for (const auto& acc : partial) {
    total.log_likelihood += acc.log_likelihood;
    for (std::size_t i = 0; i < acc.counts.size(); ++i) total.counts[i] += acc.counts[i];
  }
  return total;
}

void maximize(CipherTable& table, const std::vector<double>& counts, double floor) {
  const std::size_t cols = table.num_clusters();
  for (std::size_t t = 0; t < table.num_tags(); ++t) {
    const double* row = &counts[t * cols];
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) sum += row[c];
    double floored_sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      double p = sum > 0.0 ? row[c] / sum : 1.0 / static_cast<double>(cols);
      p = std::max(p, floor);
      table.at(t, c) = p;
      floored_sum += p;
    }
    for (std::size_t c = 0; c < cols; ++c) table.at(t, c) /= floored_sum;
  }
}

std::int64_t count_events(const ClusterCorpus& corpus) {
  std::int64_t n = 0;
  for (const auto& s : corpus) n += static_cast<std::int64_t>(s.size()) + 1;
  return n;
}

}  // namespace

CipherTable::CipherTable(std::vector<std::string> tags_in, std::vector<int> clusters_in)
    : tags(std::move(tags_in)),
      clusters(std::move(clusters_in)),
      probs(tags.size() * clusters.size(), 0.0) {}

int CipherTable::column_of(int cluster) const {
  auto it = std::find(clusters.begin(), clusters.end(), cluster);
  return it == clusters.end() ? -1 : static_cast<int>(it - clusters.begin());
}

TagTransitions transitions_from(const PosLanguageModel& lm) {
  if (lm.order() > 2) {
    throw InputError("the cipher model supports LM order 1 or 2, got " + std::to_string(lm.order()));
  }
  TagTransitions tr;
  const auto t = static_cast<std::size_t>(lm.num_tags());
  tr.num_tags = t;
  tr.start.resize(t);
  tr.trans.resize(t * t);
  tr.end.resize(t);
  auto history = [&](int prev) {
    return lm.order() == 1 ? PosLanguageModel::History{} : PosLanguageModel::History{prev};
  };
  for (std::size_t j = 0; j < t; ++j) tr.start[j] = lm.prob(history(lm.bos()), static_cast<int>(j));
  tr.empty = lm.prob(history(lm.bos()), lm.eos());
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = 0; j < t; ++j) {
      tr.trans[i * t + j] = lm.prob(history(static_cast<int>(i)), static_cast<int>(j));
    }
    tr.end[i] = lm.prob(history(static_cast<int>(i)), lm.eos());
  }
  return tr;
}

CipherTable init_table(const std::vector<std::string>& tags, const std::vector<int>& clusters,
                       std::uint64_t seed) {
  if (tags.empty() || clusters.empty()) throw InputError("cipher table needs tags and clusters");
  CipherTable table(tags, clusters);
  std::mt19937_64 rng(seed);
  for (std::size_t t = 0; t < tags.size(); ++t) {
    double sum = 0.0;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      // Normalised unit exponentials are uniform on the simplex.
      double e = -std::log(open_unit(rng));
      table.at(t, c) = e;
      sum += e;
    }
    for (std::size_t c = 0; c < clusters.size(); ++c) table.at(t, c) /= sum;
  }
  return table;
}

DeciphermentResult em_train(const ClusterCorpus& corpus, const PosLanguageModel& lm,
                            CipherTable table, const EmOptions& options) {
  if (options.max_iterations < 1) throw InputError("max_iterations must be >= 1");
  if (!(options.tol > 0.0)) throw InputError("tol must be > 0");
  check_tags(lm, table);
  const auto columns = to_columns(corpus, table);
  const auto tr = transitions_from(lm);

  DeciphermentResult result;
  Accumulator acc = expectation(columns, tr, table, true, options.workers);
  double ll = acc.log_likelihood;
  result.log_likelihood_trace.push_back(ll);
  for (int it = 1; it <= options.max_iterations; ++it) {
    maximize(table, acc.counts, options.emission_floor);
    acc = expectation(columns, tr, table, true, options.workers);
    const double next = acc.log_likelihood;
    result.log_likelihood_trace.push_back(next);
    result.iterations_run = it;
    const bool converged = ll == 0.0 || (next - ll) < options.tol * std::abs(ll);
    ll = next;
    if (converged) break;
  }
  result.table = std::move(table);
  result.log_likelihood = ll;
  result.perplexity = std::exp(-ll / static_cast<double>(count_events(corpus)));
  return result;
}

DeciphermentResult train_with_restarts(const ClusterCorpus& corpus, const PosLanguageModel& lm,
                                       const std::vector<int>& clusters, int n_restarts,
                                       std::uint64_t master_seed, const EmOptions& options) {
  if (n_restarts < 1) throw InputError("restarts must be >= 1");
  std::vector<DeciphermentResult> runs(static_cast<std::size_t>(n_restarts));
  EmOptions inner = options;
  // Parallelise across restarts when there are several; otherwise inside EM.
  const int outer_workers = n_restarts > 1 ? options.workers : 1;
  if (n_restarts > 1) inner.workers = 1;
  parallel_for(runs.size(), outer_workers, [&](std::size_t r) {
    const std::uint64_t seed = master_seed + r;
    runs[r] = em_train(corpus, lm, init_table(lm.tagset(), clusters, seed), inner);
    runs[r].restart_seed = seed;
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].perplexity < runs[best].perplexity ||
        (runs[r].perplexity == runs[best].perplexity &&
         runs[r].restart_seed < runs[best].restart_seed)) {
      best = r;
    }
  }
  return std::move(runs[best]);
}

double corpus_log_likelihood(const ClusterCorpus& corpus, const PosLanguageModel& lm,
                             const CipherTable& table, int workers) {
  check_tags(lm, table);
  const auto columns = to_columns(corpus, table);
  const auto tr = transitions_from(lm);
  return expectation(columns, tr, table, false, workers).log_likelihood;
}

std::int64_t perplexity_events(const ClusterCorpus& corpus) { return count_events(corpus); }

double corpus_perplexity(const ClusterCorpus& corpus, const PosLanguageModel& lm,
                         const CipherTable& table, int workers) {
  const auto events = count_events(corpus);
  if (events == 0) throw InputError("empty cluster corpus");
  return std::exp(-corpus_log_likelihood(corpus, lm, table, workers) /
                  static_cast<double>(events));
}

std::vector<int> viterbi_decode_indices(const ClusterSequence& sequence,
                                        const PosLanguageModel& lm, const CipherTable& table) {
  check_tags(lm, table);
  if (sequence.empty()) return {};
  const auto obs = to_columns({sequence}, table).front();
  const auto tr = transitions_from(lm);
  const std::size_t t = tr.num_tags;
  const std::size_t n = obs.size();

  std::vector<double> log_trans(t * t), log_emit(t * table.num_clusters());
  for (std::size_t i = 0; i < t * t; ++i) log_trans[i] = std::log(tr.trans[i]);
  for (std::size_t i = 0; i < log_emit.size(); ++i) log_emit[i] = std::log(table.probs[i]);
  auto emit = [&](std::size_t tag, int col) { return log_emit[tag * table.num_clusters() + col]; };

  std::vector<double> score(t), next(t);
  std::vector<int> back(n * t, 0);
  for (std::size_t j = 0; j < t; ++j) score[j] = std::log(tr.start[j]) + emit(j, obs[0]);
  for (std::size_t pos = 1; pos < n; ++pos) {
    for (std::size_t j = 0; j < t; ++j) {
      double best = -std::numeric_limits<double>::infinity();
      int arg = 0;
      for (std::size_t i = 0; i < t; ++i) {
        double s = score[i] + log_trans[i * t + j];
        if (s > best) {
          best = s;
          arg = static_cast<int>(i);
        }
      }
      next[j] = best + emit(j, obs[pos]);
      back[pos * t + j] = arg;
    }
    score.swap(next);
  }
  double best = -std::numeric_limits<double>::infinity();
  int state = 0;
  for (std::size_t i = 0; i < t; ++i) {
    double s = score[i] + std::log(tr.end[i]);
    if (s > best) {
      best = s;
      state = static_cast<int>(i);
    }
  }
  std::vector<int> path(n);
  for (std::size_t pos = n; pos-- > 0;) {
    path[pos] = state;
    state = back[pos * t + static_cast<std::size_t>(state)];
  }
  return path;
}

TagSequence viterbi_decode(const ClusterSequence& sequence, const PosLanguageModel& lm,
                           const CipherTable& table) {
  TagSequence out;
  for (int idx : viterbi_decode_indices(sequence, lm, table)) out.push_back(table.tags[idx]);
  return out;
}

std::string write_table(const CipherTable& table,
                        const std::vector<std::pair<std::string, std::string>>& headers) {
  std::string out = "#tags=" + tsv::join(table.tags, ",") + "\n";
  std::vector<std::string> ids;
  for (int c : table.clusters) ids.push_back(std::to_string(c));
  out += "#clusters=" + tsv::join(ids, ",") + "\n";
  for (const auto& [key, value] : headers) out += "#" + key + "=" + value + "\n";
  for (std::size_t t = 0; t < table.num_tags(); ++t) {
    for (std::size_t c = 0; c < table.num_clusters(); ++c) {
      out += table.tags[t] + "\t" + ids[c] + "\t" + tsv::format_double(table.at(t, c)) + "\n";
    }
  }
  return out;
}

std::string write_result(const DeciphermentResult& result,
                         const std::vector<std::pair<std::string, std::string>>& headers) {
  std::vector<std::pair<std::string, std::string>> all = {
      {"log_likelihood", tsv::format_double(result.log_likelihood)},
      {"perplexity", tsv::format_double(result.perplexity)},
      {"iterations_run", std::to_string(result.iterations_run)},
      {"restart_seed", std::to_string(result.restart_seed)},
  };
  all.insert(all.end(), headers.begin(), headers.end());
  return write_table(result.table, all);
}

CipherTable parse_table(const std::vector<std::string>& lines, const std::string& source) {
  std::vector<std::string> tags;
  std::vector<int> clusters;
  bool have_tags = false, have_clusters = false;
  std::size_t i = 0;
  for (; i < lines.size() && !lines[i].empty() && lines[i][0] == '#'; ++i) {
    std::string key, value;
    if (!tsv::parse_header(lines[i], key, value)) continue;
    if (key == "tags") {
      have_tags = true;
      tags = tsv::split(value, ',');
    } else if (key == "clusters") {
      have_clusters = true;
      for (const auto& c : tsv::split(value, ',')) {
        clusters.push_back(static_cast<int>(tsv::parse_int(c, "cluster ID")));
      }
    }
  }
  if (!have_tags || !have_clusters) throw InputError("table file missing #tags or #clusters: " + source);
  CipherTable table(tags, clusters);
  std::vector<char> seen(table.probs.size(), 0);
  std::unordered_map<std::string, std::size_t> tag_row;
  for (std::size_t t = 0; t < tags.size(); ++t) tag_row[tags[t]] = t;
  for (; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto fields = tsv::split(lines[i], '\t');
    if (fields.size() != 3) {
      throw InputError(source + ":" + std::to_string(i + 1) + ": expected tag<TAB>cluster<TAB>prob");
    }
    auto row = tag_row.find(fields[0]);
    int col = table.column_of(static_cast<int>(tsv::parse_int(fields[1], "cluster ID")));
    if (row == tag_row.end() || col < 0) {
      throw InputError(source + ":" + std::to_string(i + 1) + ": unknown tag or cluster");
    }
    double p = tsv::parse_double(fields[2], "probability");
    if (p < 0.0) throw InputError(source + ":" + std::to_string(i + 1) + ": negative probability");
    table.at(row->second, col) = p;
    seen[row->second * table.num_clusters() + col] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw InputError("table file has missing cells: " + source);
  }
  return table;
}

CipherTable load_table(const std::filesystem::path& path) {
  return parse_table(tsv::read_lines(path), path.string());
}

}  // namespace cipherpos
