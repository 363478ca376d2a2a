#include "cipherpos/poslm.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "cipherpos/error.hpp"
#include "cipherpos/tsv.hpp"

namespace cipherpos {

namespace {

constexpr const char* kBos = "<s>";
constexpr const char* kEos = "</s>";

void check_tag_name(const std::string& tag) {
  if (tag.empty() || tag == kBos || tag == kEos ||
      tag.find_first_of(" \t,\n") != std::string::npos) {
    throw InputError("invalid tag name: '" + tag + "'");
  }
}

}  // namespace

PosLanguageModel::PosLanguageModel(int order, double alpha, std::vector<std::string> tagset)
    : order_(order), alpha_(alpha), tagset_(std::move(tagset)) {
  if (order_ < 1) throw InputError("LM order must be >= 1");
  if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) throw InputError("LM alpha must be > 0");
  std::unordered_set<std::string> seen;
  for (const auto& tag : tagset_) {
    check_tag_name(tag);
    if (!seen.insert(tag).second) throw InputError("duplicate tag in tagset: " + tag);
  }
}

int PosLanguageModel::tag_index(const std::string& tag) const {
  auto it = std::find(tagset_.begin(), tagset_.end(), tag);
  return it == tagset_.end() ? -1 : static_cast<int>(it - tagset_.begin());
}

void PosLanguageModel::add_count(const History& history, int symbol, std::int64_t count) {
  if (static_cast<int>(history.size()) != order_ - 1) throw InvariantError("history length != order-1");
  if (symbol < 0 || symbol > eos()) throw InvariantError("symbol out of range");
  auto& row = counts_[history];
  row.resize(static_cast<std::size_t>(vocab_size()), 0);
  row[symbol] += count;
  totals_[history] += count;
}

std::int64_t PosLanguageModel::count(const History& history, int symbol) const {
  auto it = counts_.find(history);
  return it == counts_.end() ? 0 : it->second[symbol];
}

std::int64_t PosLanguageModel::history_count(const History& history) const {
  auto it = totals_.find(history);
  return it == totals_.end() ? 0 : it->second;
}

double PosLanguageModel::prob(const History& history, int symbol) const {
  return (static_cast<double>(count(history, symbol)) + alpha_) /
         (static_cast<double>(history_count(history)) + alpha_ * vocab_size());
}

double PosLanguageModel::log_prob(const History& history, int symbol) const {
  return std::log(prob(history, symbol));
}

PosLanguageModel PosLanguageModel::with_tagset(const std::vector<std::string>& tagset) const {
  PosLanguageModel out(order_, alpha_, tagset);
  std::vector<int> remap(static_cast<std::size_t>(num_tags()) + 2);
  for (int t = 0; t < num_tags(); ++t) {
    remap[t] = out.tag_index(tagset_[t]);
    if (remap[t] < 0) throw InputError("tag '" + tagset_[t] + "' missing from target tagset");
  }
  remap[eos()] = out.eos();
  remap[bos()] = out.bos();
  for (const auto& [history, row] : counts_) {
    History h;
    for (int s : history) h.push_back(remap[s]);
    for (int s = 0; s < vocab_size(); ++s) {
      if (row[s] != 0) out.add_count(h, remap[s], row[s]);
    }
  }
  return out;
}

PosLanguageModel train_pos_lm(const std::vector<TagSequence>& sequences,
                              const LmOptions& options,
                              const std::vector<std::string>& tagset) {
  if (sequences.empty()) throw InputError("empty LM training set");
  std::vector<std::string> tags = tagset;
  if (tags.empty()) {
    std::unordered_set<std::string> seen;
    for (const auto& seq : sequences) {
      for (const auto& tag : seq) {
        if (seen.insert(tag).second) tags.push_back(tag);
      }
    }
  }
  PosLanguageModel model(options.order, options.alpha, tags);
  PosLanguageModel::History history;
  for (const auto& seq : sequences) {
    history.assign(static_cast<std::size_t>(options.order - 1), model.bos());
    auto emit = [&](int symbol) {
      model.add_count(history, symbol, 1);
      if (!history.empty()) {
        history.erase(history.begin());
        history.push_back(symbol);
      }
    };
    for (const auto& tag : seq) {
      int idx = model.tag_index(tag);
      if (idx < 0) throw InputError("tag '" + tag + "' not in the LM tagset");
      emit(idx);
    }
    emit(model.eos());
  }
  return model;
}

PosLanguageModel concat_train(const std::vector<std::vector<TagSequence>>& parents,
                              const LmOptions& options,
                              const std::vector<std::string>& tagset) {
  if (parents.empty()) throw InputError("no parent corpora");
  std::vector<TagSequence> flat;
  for (const auto& parent : parents) flat.insert(flat.end(), parent.begin(), parent.end());
  return train_pos_lm(flat, options, tagset);
}

PosLanguageModel merge_lms(const std::vector<PosLanguageModel>& models) {
  if (models.empty()) throw InputError("no language models to merge");
  std::vector<std::string> tags;
  std::unordered_set<std::string> seen;
  for (const auto& m : models) {
    if (m.order() != models.front().order() || m.alpha() != models.front().alpha()) {
      throw InputError("cannot merge language models with different order or alpha");
    }
    for (const auto& t : m.tagset()) {
      if (seen.insert(t).second) tags.push_back(t);
    }
  }
  PosLanguageModel out(models.front().order(), models.front().alpha(), tags);
  for (const auto& m : models) {
    auto remapped = m.with_tagset(tags);
    for (const auto& [history, row] : remapped.counts()) {
      for (int s = 0; s < out.vocab_size(); ++s) {
        if (row[s] != 0) out.add_count(history, s, row[s]);
      }
    }
  }
  return out;
}

double sequence_log_prob(const PosLanguageModel& model, const TagSequence& sequence) {
  PosLanguageModel::History history(static_cast<std::size_t>(model.order() - 1), model.bos());
  double total = 0.0;
  auto step = [&](int symbol) {
    total += model.log_prob(history, symbol);
    if (!history.empty()) {
      history.erase(history.begin());
      history.push_back(symbol);
    }
  };
  for (const auto& tag : sequence) {
    int idx = model.tag_index(tag);
    if (idx < 0) throw InputError("tag '" + tag + "' not in the LM tagset");
    step(idx);
  }
  step(model.eos());
  return total;
}

double corpus_log_prob(const PosLanguageModel& model, const std::vector<TagSequence>& sequences) {
  double total = 0.0;
  for (const auto& seq : sequences) total += sequence_log_prob(model, seq);
  return total;
}

double lm_perplexity(const PosLanguageModel& model, const std::vector<TagSequence>& sequences) {
  double events = 0.0;
  for (const auto& seq : sequences) events += static_cast<double>(seq.size()) + 1.0;
  if (events == 0.0) throw InputError("no sequences for perplexity");
  return std::exp(-corpus_log_prob(model, sequences) / events);
}

std::string write_lm(const PosLanguageModel& model,
                     const std::vector<std::pair<std::string, std::string>>& headers) {
  auto name = [&](int s) -> std::string {
    if (s == model.bos()) return kBos;
    if (s == model.eos()) return kEos;
    return model.tagset()[s];
  };
  std::string out;
  out += "#order=" + std::to_string(model.order()) + "\n";
  out += "#alpha=" + tsv::format_double(model.alpha()) + "\n";
  out += "#tags=" + tsv::join(model.tagset(), ",") + "\n";
  for (const auto& [key, value] : headers) out += "#" + key + "=" + value + "\n";
  for (const auto& [history, row] : model.counts()) {
    std::vector<std::string> h;
    for (int s : history) h.push_back(name(s));
    std::string prefix = tsv::join(h, " ");
    for (int s = 0; s < model.vocab_size(); ++s) {
      if (row[s] == 0) continue;
      out += prefix + "\t" + name(s) + "\t" + std::to_string(row[s]) + "\n";
    }
  }
  return out;
}

PosLanguageModel parse_lm(const std::vector<std::string>& lines, const std::string& source) {
  int order = -1;
  double alpha = -1.0;
  bool have_tags = false;
  std::vector<std::string> tags;
  std::size_t i = 0;
  for (; i < lines.size() && !lines[i].empty() && lines[i][0] == '#'; ++i) {
    std::string key, value;
    if (!tsv::parse_header(lines[i], key, value)) continue;
    if (key == "order") {
      order = static_cast<int>(tsv::parse_int(value, "order"));
    } else if (key == "alpha") {
      alpha = tsv::parse_double(value, "alpha");
    } else if (key == "tags") {
      have_tags = true;
      if (!value.empty()) tags = tsv::split(value, ',');
    }
  }
  if (order < 1 || alpha <= 0.0 || !have_tags) {
    throw InputError("LM file missing #order, #alpha or #tags header: " + source);
  }
  PosLanguageModel model(order, alpha, tags);
  auto symbol = [&](const std::string& s, std::size_t lineno) {
    if (s == kBos) return model.bos();
    if (s == kEos) return model.eos();
    int idx = model.tag_index(s);
    if (idx < 0) {
      throw InputError(source + ":" + std::to_string(lineno + 1) + ": unknown tag '" + s + "'");
    }
    return idx;
  };
  for (; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto fields = tsv::split(lines[i], '\t');
    if (fields.size() != 3) {
      throw InputError(source + ":" + std::to_string(i + 1) + ": expected history<TAB>tag<TAB>count");
    }
    PosLanguageModel::History history;
    if (!fields[0].empty()) {
      for (const auto& s : tsv::split(fields[0], ' ')) history.push_back(symbol(s, i));
    }
    if (static_cast<int>(history.size()) != order - 1) {
      throw InputError(source + ":" + std::to_string(i + 1) + ": history length does not match order");
    }
    int sym = symbol(fields[1], i);
    if (sym == model.bos()) throw InputError(source + ":" + std::to_string(i + 1) + ": BOS cannot be predicted");
    model.add_count(history, sym, tsv::parse_int(fields[2], "count"));
  }
  return model;
}

PosLanguageModel load_lm(const std::filesystem::path& path) {
  return parse_lm(tsv::read_lines(path), path.string());
}

}  // namespace cipherpos
