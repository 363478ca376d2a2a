#include <cmath>
#include <random>

#include "cipherpos/error.hpp"
#include "cipherpos/poslm.hpp"
#include "cipherpos/tsv.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cipherpos;

namespace {

std::vector<TagSequence> random_sequences(std::mt19937_64& rng, int n, int tags) {
  std::vector<TagSequence> out;
  for (int s = 0; s < n; ++s) {
    TagSequence seq;
    const int len = static_cast<int>(rng() % 7);
    for (int i = 0; i < len; ++i) seq.push_back("T" + std::to_string(rng() % tags));
    out.push_back(seq);
  }
  return out;
}

void check_normalized(const PosLanguageModel& lm) {
  // Every observed history plus one never-seen history.
  std::vector<PosLanguageModel::History> histories;
  for (const auto& [h, row] : lm.counts()) histories.push_back(h);
  histories.emplace_back(static_cast<std::size_t>(lm.order() - 1), 0);
  for (const auto& h : histories) {
    double total = 0.0;
    for (int s = 0; s <= lm.eos(); ++s) {
      CHECK(lm.prob(h, s) > 0.0);
      total += lm.prob(h, s);
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

}  // namespace

TEST_CASE("defaults: bigram order, alpha 0.1") {
  LmOptions o;
  CHECK(o.order == 2);
  CHECK(o.alpha == 0.1);
}

TEST_CASE("additive smoothing hand computation") {
  auto lm = train_pos_lm({{"A", "B"}, {"A", "C"}}, {2, 1.0}, {"A", "B", "C"});
  CHECK(lm.vocab_size() == 4);
  const int a = lm.tag_index("A"), b = lm.tag_index("B");
  // (1 + 1) / (2 + 4)
  CHECK(lm.prob({a}, b) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(lm.prob({lm.bos()}, a) == doctest::Approx(3.0 / 6.0).epsilon(1e-15));
  CHECK(lm.prob({b}, a) == doctest::Approx(1.0 / 5.0).epsilon(1e-15));
  CHECK(lm.prob({lm.tag_index("C")}, lm.eos()) == doctest::Approx(2.0 / 5.0).epsilon(1e-15));

  // Unseen history backs off to 1/V.
  auto wide = train_pos_lm({{"A", "B"}, {"A", "C"}}, {2, 1.0}, {"A", "B", "C", "D"});
  const int d = wide.tag_index("D");
  for (int s = 0; s <= wide.eos(); ++s) CHECK(wide.prob({d}, s) == doctest::Approx(1.0 / 5.0));
}

TEST_CASE("vanishing alpha approaches the MLE") {
  auto lm = train_pos_lm({{"DET", "NOUN"}}, {2, 1e-12});
  CHECK(lm.prob({lm.tag_index("DET")}, lm.tag_index("NOUN")) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("every history is normalized over tags plus EOS") {
  std::mt19937_64 rng(1);
  for (int order : {1, 2, 3}) {
    for (double alpha : {0.01, 0.1, 2.5}) {
      check_normalized(train_pos_lm(random_sequences(rng, 30, 5), {order, alpha}));
    }
  }
}

TEST_CASE("sequence_log_prob") {
  auto lm = train_pos_lm({{"DET", "NOUN"}, {"DET", "ADJ", "NOUN"}, {"NOUN"}}, {2, 0.5});
  const int det = lm.tag_index("DET"), noun = lm.tag_index("NOUN");
  const double v = lm.vocab_size();  // 4
  CHECK(sequence_log_prob(lm, {}) == doctest::Approx(std::log(lm.prob({lm.bos()}, lm.eos()))));

  // Hand counts: BOS->DET 2 of 3, DET->NOUN 1 of 2, NOUN->EOS 3 of 3.
  const double expected = std::log((2 + 0.5) / (3 + 0.5 * v)) + std::log((1 + 0.5) / (2 + 0.5 * v)) +
                          std::log((3 + 0.5) / (3 + 0.5 * v));
  CHECK(sequence_log_prob(lm, {"DET", "NOUN"}) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(lm.prob({det}, noun) == doctest::Approx(1.5 / 4.0));

  auto flat = train_pos_lm({{"DET", "NOUN"}}, {2, 1e12});
  CHECK(sequence_log_prob(flat, {"DET", "NOUN"}) ==
        doctest::Approx(3.0 * std::log(1.0 / flat.vocab_size())).epsilon(1e-9));

  CHECK_THROWS_AS(sequence_log_prob(lm, {"VERB"}), InputError);
}

TEST_CASE("corpus log-probability is additive over sentences") {
  std::mt19937_64 rng(2);
  auto seqs = random_sequences(rng, 25, 4);
  auto lm = train_pos_lm(seqs, {2, 0.3});
  double sum = 0.0;
  for (const auto& s : seqs) sum += sequence_log_prob(lm, s);
  CHECK(corpus_log_prob(lm, seqs) == doctest::Approx(sum).epsilon(1e-14));
}

TEST_CASE("scaled counts follow the smoothing formula exactly") {
  std::mt19937_64 rng(3);
  auto seqs = random_sequences(rng, 20, 3);
  auto base = train_pos_lm(seqs, {2, 0.7});
  for (int m : {2, 5}) {
    std::vector<TagSequence> repeated;
    for (int k = 0; k < m; ++k) repeated.insert(repeated.end(), seqs.begin(), seqs.end());
    auto scaled = train_pos_lm(repeated, {2, 0.7}, base.tagset());
    const double v = base.vocab_size();
    for (const auto& [h, row] : base.counts()) {
      for (int s = 0; s <= base.eos(); ++s) {
        const double expected = (m * static_cast<double>(base.count(h, s)) + 0.7) /
                                (m * static_cast<double>(base.history_count(h)) + 0.7 * v);
        CHECK(scaled.prob(h, s) == expected);
      }
    }
  }
}

TEST_CASE("concat_train") {
  std::mt19937_64 rng(4);
  auto p1 = random_sequences(rng, 10, 4);
  auto p2 = random_sequences(rng, 12, 5);
  auto p3 = random_sequences(rng, 8, 3);

  CHECK(concat_train({p1}, {2, 0.1}) == train_pos_lm(p1, {2, 0.1}));

  auto two = concat_train({p1, p2}, {2, 0.1});
  auto m1 = train_pos_lm(p1, {2, 0.1}), m2 = train_pos_lm(p2, {2, 0.1});
  for (const auto& [h, row] : two.counts()) {
    for (int s = 0; s <= two.eos(); ++s) {
      // Re-express the history and symbol in each parent's own indexing.
      auto name = [&](int sym) { return sym == two.bos() ? std::string("<s>") : sym == two.eos() ? std::string("</s>") : two.tagset()[sym]; };
      auto idx = [&](const PosLanguageModel& m, const std::string& n) {
        return n == "<s>" ? m.bos() : n == "</s>" ? m.eos() : m.tag_index(n);
      };
      std::int64_t expected = 0;
      for (const auto* m : {&m1, &m2}) {
        const int hs = idx(*m, name(h[0]));
        const int ss = idx(*m, name(s));
        if (hs >= 0 && ss >= 0) expected += m->count({hs}, ss);
      }
      CHECK(two.count(h, s) == expected);
    }
  }

  std::vector<TagSequence> flat = p1;
  flat.insert(flat.end(), p2.begin(), p2.end());
  flat.insert(flat.end(), p3.begin(), p3.end());
  CHECK(concat_train({p1, p2, p3}, {2, 0.1}) == train_pos_lm(flat, {2, 0.1}));
  CHECK(merge_lms({m1, m2, train_pos_lm(p3, {2, 0.1})}) == train_pos_lm(flat, {2, 0.1}));

  CHECK_THROWS_AS(concat_train({}, {2, 0.1}), InputError);
}

TEST_CASE("LM file round trip is exact") {
  std::mt19937_64 rng(5);
  for (int order : {1, 2, 3}) {
    auto lm = train_pos_lm(random_sequences(rng, 30, 6), {order, 0.123456789012345});
    auto text = write_lm(lm, {{"seed", "42"}});
    auto again = parse_lm(tsv::split(text, '\n'));
    CHECK(again == lm);
    CHECK(write_lm(again, {{"seed", "42"}}) == text);
  }
  CHECK_THROWS_AS(parse_lm({"#order=2", "#alpha=0.1"}), InputError);
  CHECK_THROWS_AS(parse_lm({"#order=2", "#alpha=0.1", "#tags=A", "<s>\tB\t1"}), InputError);
}

TEST_CASE("training errors") {
  CHECK_THROWS_AS(train_pos_lm({}, {2, 0.1}), InputError);
  CHECK_THROWS_AS(train_pos_lm({{"A"}}, {2, 0.0}), InputError);
  CHECK_THROWS_AS(train_pos_lm({{"A"}}, {2, -1.0}), InputError);
  CHECK_THROWS_AS(train_pos_lm({{"A"}}, {0, 0.1}), InputError);
  CHECK_THROWS_AS(train_pos_lm({{"A", "B"}}, {2, 0.1}, {"A"}), InputError);
  CHECK_THROWS_AS(train_pos_lm({{"</s>"}}, {2, 0.1}), InputError);
}
