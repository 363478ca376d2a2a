// cipherpos: grounded POS tagging from raw text via Brown clusters and
// cipher decipherment against parent-language tag models.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cipherpos/brown.hpp"
#include "cipherpos/cipher.hpp"
#include "cipherpos/corpus.hpp"
#include "cipherpos/error.hpp"
#include "cipherpos/eval.hpp"
#include "cipherpos/grounder.hpp"
#include "cipherpos/poslm.hpp"
#include "cipherpos/tsv.hpp"
#include "cipherpos/typology.hpp"

namespace fs = std::filesystem;
using namespace cipherpos;

namespace {

struct RunConfig {
  std::uint64_t seed = 42;
  int clusters = 500;
  int restarts = 70;
  int max_iterations = 500;
  double tol = 1e-6;
  double alpha = 0.1;
  int order = 2;
  int workers = 1;
  std::int64_t min_count = 1;
  bool lowercase = false;
};

using Headers = std::vector<std::pair<std::string, std::string>>;

void emit(const std::string& output, const std::string& content) {
  if (output.empty() || output == "-") {
    std::cout << content;
  } else {
    tsv::write_file(output, content);
  }
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

void add_seed(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--seed", cfg.seed, "Random seed (echoed into output headers)")->capture_default_str();
}

void add_workers(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--workers", cfg.workers, "Worker threads; outputs do not depend on this")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grounded unsupervised POS tagging by cluster decipherment."};
  app.require_subcommand(1);
  RunConfig cfg;

  // cluster
  std::string cluster_input, cluster_output;
  auto* cluster = app.add_subcommand("cluster", "Brown-cluster a plaintext corpus");
  cluster->add_option("--input", cluster_input, "Plaintext, one sentence per line")->required();
  cluster->add_option("--output", cluster_output, "clusters.tsv to write")->required();
  cluster->add_option("--clusters", cfg.clusters, "Number of clusters")->capture_default_str();
  cluster->add_option("--min-count", cfg.min_count, "Words below this frequency map to UNK")
      ->capture_default_str();
  cluster->add_flag("--lowercase", cfg.lowercase, "ASCII-lowercase tokens");
  add_seed(cluster, cfg);
  add_workers(cluster, cfg);

  // train-lm
  std::vector<std::string> lm_inputs;
  std::string lm_output;
  auto* train_lm = app.add_subcommand("train-lm", "Train a POS tag n-gram model from CoNLL-U");
  train_lm->add_option("--input", lm_inputs, "CoNLL-U file(s); several are concatenated")
      ->required();
  train_lm->add_option("--output", lm_output, "lm.tsv to write")->required();
  train_lm->add_option("--order", cfg.order, "n-gram order")->capture_default_str();
  train_lm->add_option("--alpha", cfg.alpha, "Additive smoothing constant")->capture_default_str();
  add_seed(train_lm, cfg);

  // ground
  std::string ground_clusters, ground_text, ground_output, mode = "single", tagset_arg;
  std::vector<std::string> ground_lms, ground_parents;
  auto* ground = app.add_subcommand("ground", "Learn a cipher table and write a tagger bundle");
  ground->add_option("--cluster-file", ground_clusters, "clusters.tsv")->required();
  ground->add_option("--text", ground_text, "Child-language plaintext for EM")->required();
  ground->add_option("--lm", ground_lms, "Parent LM file(s)");
  ground->add_option("--parent", ground_parents, "Parent CoNLL-U file(s)");
  ground->add_option("--mode", mode, "single or avg")
      ->check(CLI::IsMember({"single", "avg"}))
      ->capture_default_str();
  ground->add_option("--output", ground_output, "Bundle directory")->required();
  ground->add_option("--restarts", cfg.restarts, "Random restarts")->capture_default_str();
  ground->add_option("--iters", cfg.max_iterations, "Maximum EM iterations")->capture_default_str();
  ground->add_option("--tol", cfg.tol, "Relative log-likelihood convergence threshold")
      ->capture_default_str();
  ground->add_option("--order", cfg.order, "LM order for --parent corpora")->capture_default_str();
  ground->add_option("--alpha", cfg.alpha, "LM smoothing for --parent corpora")->capture_default_str();
  ground->add_option("--tagset", tagset_arg, "Comma-separated tag order all parents must fit");
  ground->add_flag("--lowercase", cfg.lowercase, "ASCII-lowercase tokens");
  add_seed(ground, cfg);
  add_workers(ground, cfg);

  // tag
  std::string tag_bundle, tag_input, tag_output;
  auto* tag_cmd = app.add_subcommand("tag", "Tag plaintext with a bundle");
  tag_cmd->add_option("--bundle", tag_bundle, "Bundle directory")->required();
  tag_cmd->add_option("--input", tag_input, "Plaintext to tag")->required();
  tag_cmd->add_option("--output", tag_output, "word<TAB>tag output (default stdout)");
  tag_cmd->add_flag("--lowercase", cfg.lowercase, "ASCII-lowercase tokens before lookup");
  add_seed(tag_cmd, cfg);
  add_workers(tag_cmd, cfg);

  // eval
  std::string eval_predicted, eval_gold, eval_m2o, eval_output;
  bool check_words = false;
  auto* eval_cmd = app.add_subcommand("eval", "Score predicted tags against CoNLL-U gold");
  eval_cmd->add_option("--predicted", eval_predicted, "word<TAB>tag file")->required();
  eval_cmd->add_option("--gold", eval_gold, "Gold CoNLL-U")->required();
  eval_cmd->add_option("--m2o", eval_m2o, "clusters.tsv for many-to-one accuracy of the gold words");
  eval_cmd->add_option("--output", eval_output, "Report TSV (default stdout)");
  eval_cmd->add_flag("--check-words", check_words, "Require predicted words to match gold");
  add_seed(eval_cmd, cfg);

  // typology
  std::string wals_path, child, typology_output, projection_output;
  auto* typology = app.add_subcommand("typology", "Rank parents by typological similarity");
  typology->add_option("--wals", wals_path, "WALS feature TSV")->required();
  typology->add_option("--child", child, "Child language name")->required();
  typology->add_option("--output", typology_output, "Ranking TSV (default stdout)");
  typology->add_option("--projection-out", projection_output, "Write the fitted PCA projection");
  add_seed(typology, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const Headers seed_header = {{"seed", std::to_string(cfg.seed)}};
  LoadOptions load_options{cfg.lowercase};

  try {
    if (*cluster) {
      auto corpus = load_plaintext(cluster_input, load_options);
      auto clustering = train_brown(corpus, {cfg.clusters, cfg.min_count});
      Headers headers = seed_header;
      headers.emplace_back("clusters", std::to_string(clustering.num_clusters));
      headers.emplace_back("min_count", std::to_string(cfg.min_count));
      headers.emplace_back("mutual_information",
                           tsv::format_double(mutual_information(clustering, corpus)));
      emit(cluster_output, write_clusters(clustering, headers));
    } else if (*train_lm) {
      std::vector<std::vector<TagSequence>> parents;
      for (const auto& path : lm_inputs) parents.push_back(extract_tag_sequences(load_conllu(path)));
      auto lm = concat_train(parents, {cfg.order, cfg.alpha});
      emit(lm_output, write_lm(lm, seed_header));
    } else if (*ground) {
      auto clustering = load_clusters(ground_clusters);
      auto text = load_plaintext(ground_text, load_options);
      auto cluster_corpus = assign_clusters(text, clustering);

      std::vector<NamedLm> parents;
      for (const auto& path : ground_lms) parents.push_back({stem_of(path), load_lm(path)});
      for (const auto& path : ground_parents) {
        parents.push_back({stem_of(path),
                           train_pos_lm(extract_tag_sequences(load_conllu(path)),
                                        {cfg.order, cfg.alpha})});
      }

      GroundOptions options;
      options.restarts = cfg.restarts;
      options.seed = cfg.seed;
      options.em.max_iterations = cfg.max_iterations;
      options.em.tol = cfg.tol;
      options.em.workers = cfg.workers;
      if (!tagset_arg.empty()) options.tagset = tsv::split(tagset_arg, ',');

      GroundedTagger tagger;
      if (mode == "single") {
        if (parents.size() != 1) {
          throw InputError("--mode single needs exactly one --lm or --parent");
        }
        tagger = build_single_parent(clustering, cluster_corpus, parents.front(), options);
      } else {
        if (parents.size() < 2) throw InputError("--mode avg needs at least two parents");
        tagger = build_cipher_avg(clustering, cluster_corpus, parents, options);
      }
      Headers headers = seed_header;
      headers.emplace_back("mode", mode);
      headers.emplace_back("perplexity", tsv::format_double(corpus_perplexity(
                                             cluster_corpus, tagger.lm, tagger.table, cfg.workers)));
      save_bundle(tagger, ground_output, headers);
    } else if (*tag_cmd) {
      auto tagger = load_bundle(tag_bundle);
      auto lines = tsv::read_lines(tag_input);
      auto text = parse_plaintext(lines, load_options);
      emit(tag_output, to_tagged_tsv(tag(tagger, text, cfg.workers)));
    } else if (*eval_cmd) {
      auto predicted = load_tagged_tsv(eval_predicted);
      auto gold = load_conllu(eval_gold);
      auto report = tag_accuracy(predicted, gold, check_words);
      if (!eval_m2o.empty()) {
        auto clustering = load_clusters(eval_m2o);
        report.many_to_one = many_to_one(assign_clusters(gold.words(), clustering), gold).accuracy;
      }
      emit(eval_output, write_report(report, seed_header));
    } else if (*typology) {
      auto vectors = load_wals(wals_path);
      TypologyProjection projection;
      auto ranking = typology_similarity(vectors, child, &projection);
      std::string out = "#seed=" + std::to_string(cfg.seed) + "\n#child=" + child + "\n";
      out += "rank\tparent\tcosine\n";
      for (std::size_t i = 0; i < ranking.size(); ++i) {
        out += std::to_string(i + 1) + "\t" + ranking[i].first + "\t" +
               tsv::format_double(ranking[i].second) + "\n";
      }
      emit(typology_output, out);
      if (!projection_output.empty()) tsv::write_file(projection_output, write_projection(projection));
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvariantError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
