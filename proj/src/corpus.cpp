#include "cipherpos/corpus.hpp"

#include <algorithm>
#include <unordered_set>

#include "cipherpos/error.hpp"
#include "cipherpos/tsv.hpp"

namespace cipherpos {

namespace {

void ascii_lower(std::string& s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
}

}  // namespace

TokenizedCorpus TokenizedCorpus::from_sentences(std::vector<Sentence> sentences) {
  TokenizedCorpus corpus;
  for (auto& sentence : sentences) {
    if (sentence.empty()) continue;
    for (const auto& token : sentence) {
      if (token.empty()) throw InputError("empty token in sentence");
      ++corpus.vocab[token];
    }
    corpus.sentences.push_back(std::move(sentence));
  }
  return corpus;
}

std::int64_t TokenizedCorpus::token_count() const {
  std::int64_t n = 0;
  for (const auto& s : sentences) n += static_cast<std::int64_t>(s.size());
  return n;
}

TaggedCorpus TaggedCorpus::from_sentences(
    std::vector<std::vector<TaggedToken>> sentences) {
  TaggedCorpus corpus;
  std::unordered_set<std::string> seen;
  for (auto& sentence : sentences) {
    if (sentence.empty()) continue;
    for (const auto& [word, tag] : sentence) {
      if (seen.insert(tag).second) corpus.tagset.push_back(tag);
    }
    corpus.sentences.push_back(std::move(sentence));
  }
  return corpus;
}

std::int64_t TaggedCorpus::token_count() const {
  std::int64_t n = 0;
  for (const auto& s : sentences) n += static_cast<std::int64_t>(s.size());
  return n;
}

TokenizedCorpus TaggedCorpus::words() const {
  std::vector<Sentence> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) {
    Sentence words;
    words.reserve(s.size());
    for (const auto& [word, tag] : s) words.push_back(word);
    out.push_back(std::move(words));
  }
  return TokenizedCorpus::from_sentences(std::move(out));
}

TokenizedCorpus parse_plaintext(const std::vector<std::string>& lines,
                                const LoadOptions& options) {
  std::vector<Sentence> sentences;
  for (const auto& line : lines) {
    Sentence sentence;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
      if (j > i) {
        std::string token = line.substr(i, j - i);
        if (options.lowercase) ascii_lower(token);
        sentence.push_back(std::move(token));
      }
      i = j;
    }
    if (!sentence.empty()) sentences.push_back(std::move(sentence));
  }
  return TokenizedCorpus::from_sentences(std::move(sentences));
}

TokenizedCorpus load_plaintext(const std::filesystem::path& path,
                               const LoadOptions& options) {
  auto corpus = parse_plaintext(tsv::read_lines(path), options);
  if (corpus.sentences.empty()) {
    throw InputError("no non-blank lines in " + path.string());
  }
  return corpus;
}

std::string to_plaintext(const TokenizedCorpus& corpus) {
  std::string out;
  for (const auto& sentence : corpus.sentences) {
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      if (i > 0) out += ' ';
      out += sentence[i];
    }
    out += '\n';
  }
  return out;
}

TaggedCorpus parse_conllu(const std::vector<std::string>& lines,
                          const std::string& source) {
  std::vector<std::vector<TaggedToken>> sentences;
  std::vector<TaggedToken> current;
  for (std::size_t lineno = 0; lineno < lines.size(); ++lineno) {
    const std::string& line = lines[lineno];
    if (line.empty()) {
      if (!current.empty()) sentences.push_back(std::move(current));
      current.clear();
      continue;
    }
    if (line[0] == '#') continue;
    auto fields = tsv::split(line, '\t');
    if (fields.size() < 10) {
      throw InputError(source + ":" + std::to_string(lineno + 1) + ": expected 10 columns, got " +
                       std::to_string(fields.size()));
    }
    const std::string& id = fields[0];
    if (id.find('-') != std::string::npos || id.find('.') != std::string::npos) continue;
    if (fields[1].empty() || fields[3].empty()) {
      throw InputError(source + ":" + std::to_string(lineno + 1) + ": empty FORM or UPOS");
    }
    current.emplace_back(fields[1], fields[3]);
  }
  if (!current.empty()) sentences.push_back(std::move(current));
  return TaggedCorpus::from_sentences(std::move(sentences));
}

TaggedCorpus load_conllu(const std::filesystem::path& path) {
  auto lines = tsv::read_lines(path);
  if (lines.empty()) throw InputError("empty CoNLL-U file: " + path.string());
  auto corpus = parse_conllu(lines, path.string());
  if (corpus.sentences.empty()) {
    throw InputError("no tokens in CoNLL-U file: " + path.string());
  }
  return corpus;
}

TaggedCorpus load_tagged_tsv(const std::filesystem::path& path) {
  std::vector<std::vector<TaggedToken>> sentences;
  std::vector<TaggedToken> current;
  auto lines = tsv::read_lines(path);
  for (std::size_t lineno = 0; lineno < lines.size(); ++lineno) {
    const auto& line = lines[lineno];
    if (line.empty()) {
      if (!current.empty()) sentences.push_back(std::move(current));
      current.clear();
      continue;
    }
    if (line[0] == '#') continue;
    auto fields = tsv::split(line, '\t');
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw InputError(path.string() + ":" + std::to_string(lineno + 1) +
                       ": expected word<TAB>tag");
    }
    current.emplace_back(fields[0], fields[1]);
  }
  if (!current.empty()) sentences.push_back(std::move(current));
  return TaggedCorpus::from_sentences(std::move(sentences));
}

std::string to_tagged_tsv(const TaggedCorpus& corpus) {
  std::string out;
  for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
    if (s > 0) out += '\n';
    for (const auto& [word, tag] : corpus.sentences[s]) {
      out += word;
      out += '\t';
      out += tag;
      out += '\n';
    }
  }
  return out;
}

std::vector<TagSequence> extract_tag_sequences(const TaggedCorpus& corpus) {
  std::vector<TagSequence> out;
  out.reserve(corpus.sentences.size());
  for (const auto& sentence : corpus.sentences) {
    TagSequence tags;
    tags.reserve(sentence.size());
    for (const auto& [word, tag] : sentence) tags.push_back(tag);
    out.push_back(std::move(tags));
  }
  return out;
}

}  // namespace cipherpos
