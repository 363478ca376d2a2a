#include "cipherpos/grounder.hpp"

#include <unordered_set>

#include "cipherpos/error.hpp"
#include "cipherpos/parallel.hpp"
#include "cipherpos/tsv.hpp"

namespace cipherpos {

namespace {

ProvenanceEntry provenance_of(const std::string& name, const DeciphermentResult& r) {
  return {name, r.restart_seed, r.perplexity, r.log_likelihood, r.iterations_run};
}

std::vector<std::string> unified_tagset(const std::vector<NamedLm>& parents,
                                        const std::vector<std::string>& fixed) {
  if (!fixed.empty()) {
    std::unordered_set<std::string> allowed(fixed.begin(), fixed.end());
    for (const auto& p : parents) {
      for (const auto& t : p.lm.tagset()) {
        if (!allowed.count(t)) {
          throw InputError("parent '" + p.name + "' uses tag '" + t + "' outside the tagset");
        }
      }
    }
    return fixed;
  }
  std::vector<std::string> tags;
  std::unordered_set<std::string> seen;
  for (const auto& p : parents) {
    for (const auto& t : p.lm.tagset()) {
      if (seen.insert(t).second) tags.push_back(t);
    }
  }
  return tags;
}

}  // namespace

GroundedTagger build_single_parent(const Clustering& clustering, const ClusterCorpus& corpus,
                                   const NamedLm& parent, const GroundOptions& options) {
  PosLanguageModel lm = options.tagset.empty() ? parent.lm : parent.lm.with_tagset(options.tagset);
  auto result = train_with_restarts(corpus, lm, clustering.alphabet(), options.restarts,
                                    options.seed, options.em);
  GroundedTagger tagger{clustering, std::move(result.table), std::move(lm), {}};
  tagger.provenance.push_back(provenance_of(parent.name, result));
  return tagger;
}

CipherTable average_tables(const std::vector<CipherTable>& tables) {
  if (tables.empty()) throw InputError("no tables to average");
  CipherTable out(tables.front().tags, tables.front().clusters);
  for (const auto& t : tables) {
    if (t.tags != out.tags || t.clusters != out.clusters || t.probs.size() != out.probs.size()) {
      throw InputError("cipher tables have different tag or cluster axes");
    }
    for (std::size_t i = 0; i < out.probs.size(); ++i) out.probs[i] += t.probs[i];
  }
  const double n = static_cast<double>(tables.size());
  for (double& p : out.probs) p /= n;
  return out;
}

GroundedTagger build_cipher_avg(const Clustering& clustering, const ClusterCorpus& corpus,
                                const std::vector<NamedLm>& parents,
                                const GroundOptions& options) {
  if (parents.size() < 2) throw InputError("cipher-avg needs at least two parents");
  const auto tags = unified_tagset(parents, options.tagset);

  std::vector<CipherTable> tables;
  std::vector<PosLanguageModel> lms;
  GroundedTagger tagger;
  for (const auto& parent : parents) {
    PosLanguageModel lm = parent.lm.with_tagset(tags);
    auto result = train_with_restarts(corpus, lm, clustering.alphabet(), options.restarts,
                                      options.seed, options.em);
    tagger.provenance.push_back(provenance_of(parent.name, result));
    tables.push_back(std::move(result.table));
    lms.push_back(std::move(lm));
  }
  tagger.clustering = clustering;
  tagger.table = average_tables(tables);
  tagger.lm = merge_lms(lms).with_tagset(tags);
  return tagger;
}

GroundedTagger build_cipher_avg(const Clustering& clustering, const ClusterCorpus& corpus,
                                const std::vector<NamedTagCorpus>& parents,
                                const LmOptions& lm_options, const GroundOptions& options) {
  std::vector<NamedLm> lms;
  for (const auto& p : parents) lms.push_back({p.name, train_pos_lm(p.sequences, lm_options)});
  return build_cipher_avg(clustering, corpus, lms, options);
}

TaggedCorpus tag(const GroundedTagger& tagger, const TokenizedCorpus& corpus, int workers) {
  const auto clusters = assign_clusters(corpus, tagger.clustering);
  std::vector<std::vector<TaggedToken>> sentences(corpus.sentences.size());
  parallel_for(sentences.size(), workers, [&](std::size_t s) {
    const auto tags = viterbi_decode(clusters[s], tagger.lm, tagger.table);
    auto& out = sentences[s];
    out.reserve(tags.size());
    for (std::size_t i = 0; i < tags.size(); ++i) out.emplace_back(corpus.sentences[s][i], tags[i]);
  });
  return TaggedCorpus::from_sentences(std::move(sentences));
}

void save_bundle(const GroundedTagger& tagger, const std::filesystem::path& dir,
                 const std::vector<std::pair<std::string, std::string>>& headers) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create bundle directory: " + dir.string());
  tsv::write_file(dir / "clusters.tsv", write_clusters(tagger.clustering, headers));
  tsv::write_file(dir / "table.tsv", write_table(tagger.table, headers));
  tsv::write_file(dir / "lm.tsv", write_lm(tagger.lm, headers));
  std::string prov;
  for (const auto& [key, value] : headers) prov += "#" + key + "=" + value + "\n";
  prov += "#columns=parent,restart_seed,perplexity,log_likelihood,iterations_run\n";
  for (const auto& p : tagger.provenance) {
    prov += p.parent + "\t" + std::to_string(p.restart_seed) + "\t" +
            tsv::format_double(p.perplexity) + "\t" + tsv::format_double(p.log_likelihood) +
            "\t" + std::to_string(p.iterations_run) + "\n";
  }
  tsv::write_file(dir / "provenance.tsv", prov);
}

GroundedTagger load_bundle(const std::filesystem::path& dir) {
  GroundedTagger tagger;
  tagger.clustering = load_clusters(dir / "clusters.tsv");
  tagger.table = load_table(dir / "table.tsv");
  tagger.lm = load_lm(dir / "lm.tsv");
  const auto prov_path = dir / "provenance.tsv";
  auto lines = tsv::read_lines(prov_path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty() || lines[i][0] == '#') continue;
    auto f = tsv::split(lines[i], '\t');
    if (f.size() != 5) {
      throw InputError(prov_path.string() + ":" + std::to_string(i + 1) + ": expected 5 columns");
    }
    tagger.provenance.push_back({f[0],
                                 static_cast<std::uint64_t>(tsv::parse_int(f[1], "restart_seed")),
                                 tsv::parse_double(f[2], "perplexity"),
                                 tsv::parse_double(f[3], "log_likelihood"),
                                 static_cast<int>(tsv::parse_int(f[4], "iterations_run"))});
  }
  if (tagger.table.tags != tagger.lm.tagset()) {
    throw InputError("bundle table tags do not match the LM tagset: " + dir.string());
  }
  if (tagger.table.clusters != tagger.clustering.alphabet()) {
    throw InputError("bundle table clusters do not match the clustering: " + dir.string());
  }
  return tagger;
}

}  // namespace cipherpos
