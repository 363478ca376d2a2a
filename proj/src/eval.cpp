#include "cipherpos/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "cipherpos/error.hpp"
#include "cipherpos/tsv.hpp"

namespace cipherpos {

namespace {

void check_shapes(const TaggedCorpus& predicted, const TaggedCorpus& gold, bool check_words) {
  if (predicted.sentences.size() != gold.sentences.size()) {
    throw InputError("sentence count mismatch: " + std::to_string(predicted.sentences.size()) +
                     " predicted vs " + std::to_string(gold.sentences.size()) + " gold");
  }
  for (std::size_t s = 0; s < gold.sentences.size(); ++s) {
    if (predicted.sentences[s].size() != gold.sentences[s].size()) {
      throw InputError("token count mismatch in sentence " + std::to_string(s + 1));
    }
    if (!check_words) continue;
    for (std::size_t i = 0; i < gold.sentences[s].size(); ++i) {
      if (predicted.sentences[s][i].first != gold.sentences[s][i].first) {
        throw InputError("word mismatch in sentence " + std::to_string(s + 1) + ": '" +
                         predicted.sentences[s][i].first + "' vs '" +
                         gold.sentences[s][i].first + "'");
      }
    }
  }
}

TagScores scores_from(std::int64_t gold, std::int64_t predicted, std::int64_t correct) {
  TagScores s;
  s.gold = gold;
  s.predicted = predicted;
  s.correct = correct;
  s.precision = predicted > 0 ? static_cast<double>(correct) / static_cast<double>(predicted) : 0.0;
  s.recall = gold > 0 ? static_cast<double>(correct) / static_cast<double>(gold) : 0.0;
  s.f1 = s.precision + s.recall > 0.0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

}  // namespace

ManyToOne many_to_one(const ClusterCorpus& clusters, const TaggedCorpus& gold) {
  if (clusters.size() != gold.sentences.size()) throw InputError("sentence count mismatch");
  std::map<int, std::map<std::string, std::int64_t>> cooc;
  std::int64_t total = 0;
  for (std::size_t s = 0; s < clusters.size(); ++s) {
    if (clusters[s].size() != gold.sentences[s].size()) {
      throw InputError("token count mismatch in sentence " + std::to_string(s + 1));
    }
    for (std::size_t i = 0; i < clusters[s].size(); ++i) {
      ++cooc[clusters[s][i]][gold.sentences[s][i].second];
      ++total;
    }
  }
  ManyToOne out;
  std::int64_t correct = 0;
  for (const auto& [cluster, tags] : cooc) {
    // std::map iterates tags in lexicographic order, so strict > keeps the
    // smallest tag on ties.
    const std::string* best = nullptr;
    std::int64_t best_count = -1;
    for (const auto& [t, c] : tags) {
      if (c > best_count) {
        best = &t;
        best_count = c;
      }
    }
    out.mapping[cluster] = *best;
    correct += best_count;
  }
  out.accuracy = total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  return out;
}

EvalReport tag_accuracy(const TaggedCorpus& predicted, const TaggedCorpus& gold, bool check_words) {
  check_shapes(predicted, gold, check_words);
  EvalReport report;
  // Tags come from the tokens themselves, so hand-edited corpora with a
  // stale `tagset` still score correctly.
  std::unordered_map<std::string, std::size_t> index;
  auto add = [&](const std::string& t) {
    if (index.emplace(t, report.tags.size()).second) report.tags.push_back(t);
  };
  for (const auto& t : gold.tagset) add(t);
  for (const auto& s : gold.sentences)
    for (const auto& tok : s) add(tok.second);
  for (const auto& t : predicted.tagset) add(t);
  for (const auto& s : predicted.sentences)
    for (const auto& tok : s) add(tok.second);
  const std::size_t n = report.tags.size();
  report.confusion.assign(n, std::vector<std::int64_t>(n, 0));

  std::int64_t correct = 0;
  for (std::size_t s = 0; s < gold.sentences.size(); ++s) {
    for (std::size_t i = 0; i < gold.sentences[s].size(); ++i) {
      const auto& g = gold.sentences[s][i].second;
      const auto& p = predicted.sentences[s][i].second;
      ++report.confusion[index.at(g)][index.at(p)];
      if (g == p) ++correct;
      ++report.n_tokens;
    }
  }
  report.accuracy =
      report.n_tokens > 0 ? static_cast<double>(correct) / static_cast<double>(report.n_tokens) : 0.0;

  for (std::size_t t = 0; t < n; ++t) {
    std::int64_t gold_count = 0, pred_count = 0;
    for (std::size_t u = 0; u < n; ++u) {
      gold_count += report.confusion[t][u];
      pred_count += report.confusion[u][t];
    }
    report.per_tag[report.tags[t]] = scores_from(gold_count, pred_count, report.confusion[t][t]);
  }
  return report;
}

TagScores per_tag_prf(const TaggedCorpus& predicted, const TaggedCorpus& gold,
                      const std::string& tag) {
  check_shapes(predicted, gold, false);
  std::int64_t g = 0, p = 0, c = 0;
  for (std::size_t s = 0; s < gold.sentences.size(); ++s) {
    for (std::size_t i = 0; i < gold.sentences[s].size(); ++i) {
      const bool is_gold = gold.sentences[s][i].second == tag;
      const bool is_pred = predicted.sentences[s][i].second == tag;
      g += is_gold;
      p += is_pred;
      c += is_gold && is_pred;
    }
  }
  return scores_from(g, p, c);
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InputError("pearson: length mismatch");
  if (x.size() < 2) throw InputError("pearson needs at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw InputError("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double znorm_pearson(const std::vector<GroupedPoint>& points) {
  if (points.size() < 2) throw InputError("znorm_pearson needs at least two points");
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < points.size(); ++i) groups[points[i].group].push_back(i);
  std::vector<double> xs(points.size()), ys(points.size());
  for (const auto& [name, members] : groups) {
    if (members.size() < 2) throw InputError("group '" + name + "' has fewer than two points");
    double mean = 0.0;
    for (auto i : members) mean += points[i].x;
    mean /= static_cast<double>(members.size());
    double var = 0.0;
    for (auto i : members) var += (points[i].x - mean) * (points[i].x - mean);
    var /= static_cast<double>(members.size());
    if (!(var > 0.0)) throw InputError("group '" + name + "' has zero variance in x");
    const double sd = std::sqrt(var);
    for (auto i : members) {
      xs[i] = (points[i].x - mean) / sd;
      ys[i] = points[i].y;
    }
  }
  return pearson(xs, ys);
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * fraction);
  return buf;
}

std::string write_report(const EvalReport& report,
                         const std::vector<std::pair<std::string, std::string>>& headers) {
  std::string out;
  for (const auto& [key, value] : headers) out += "#" + key + "=" + value + "\n";
  out += "#section=SUMMARY\n";
  out += "metric\tvalue\n";
  out += "accuracy\t" + tsv::format_double(report.accuracy) + "\n";
  out += "accuracy_pct\t" + percent(report.accuracy) + "\n";
  if (report.many_to_one) {
    out += "many_to_one\t" + tsv::format_double(*report.many_to_one) + "\n";
    out += "many_to_one_pct\t" + percent(*report.many_to_one) + "\n";
  }
  out += "n_tokens\t" + std::to_string(report.n_tokens) + "\n";

  out += "#section=PER_TAG\n";
  out += "tag\tprecision\trecall\tf1\tgold\tpredicted\tcorrect\n";
  for (const auto& tag : report.tags) {
    const auto& s = report.per_tag.at(tag);
    out += tag + "\t" + percent(s.precision) + "\t" + percent(s.recall) + "\t" + percent(s.f1) +
           "\t" + std::to_string(s.gold) + "\t" + std::to_string(s.predicted) + "\t" +
           std::to_string(s.correct) + "\n";
  }

  out += "#section=CONFUSION\n";
  out += "gold\\predicted";
  for (const auto& tag : report.tags) out += "\t" + tag;
  out += "\n";
  for (std::size_t g = 0; g < report.tags.size(); ++g) {
    out += report.tags[g];
    for (auto c : report.confusion[g]) out += "\t" + std::to_string(c);
    out += "\n";
  }
  return out;
}

}  // namespace cipherpos
