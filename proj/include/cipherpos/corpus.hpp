#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace cipherpos {

using Sentence = std::vector<std::string>;
using TagSequence = std::vector<std::string>;

// Raw text: sentences of surface tokens plus the word frequency table.
struct TokenizedCorpus {
  std::vector<Sentence> sentences;
  std::map<std::string, std::int64_t> vocab;

  static TokenizedCorpus from_sentences(std::vector<Sentence> sentences);

  std::int64_t token_count() const;
  bool operator==(const TokenizedCorpus&) const = default;
};

using TaggedToken = std::pair<std::string, std::string>;  // (word, tag)

struct TaggedCorpus {
  std::vector<std::vector<TaggedToken>> sentences;
  std::vector<std::string> tagset;  // first-occurrence order

  static TaggedCorpus from_sentences(std::vector<std::vector<TaggedToken>> sentences);

  std::int64_t token_count() const;
  TokenizedCorpus words() const;
};

struct LoadOptions {
  bool lowercase = false;  // ASCII-only folding
};

// One sentence per non-blank line, tokens separated by spaces.
TokenizedCorpus load_plaintext(const std::filesystem::path& path,
                               const LoadOptions& options = {});
TokenizedCorpus parse_plaintext(const std::vector<std::string>& lines,
                                const LoadOptions& options = {});
std::string to_plaintext(const TokenizedCorpus& corpus);

// (FORM, UPOS) pairs from a CoNLL-U file. Multiword-token ranges and empty
// nodes are skipped.
TaggedCorpus load_conllu(const std::filesystem::path& path);
TaggedCorpus parse_conllu(const std::vector<std::string>& lines,
                          const std::string& source = "<memory>");

// Two-column `word<TAB>tag` rows with blank lines between sentences; '#'
// lines are ignored. This is what `cipherpos tag` writes.
TaggedCorpus load_tagged_tsv(const std::filesystem::path& path);
std::string to_tagged_tsv(const TaggedCorpus& corpus);

std::vector<TagSequence> extract_tag_sequences(const TaggedCorpus& corpus);

}  // namespace cipherpos
