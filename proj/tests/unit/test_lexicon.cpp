#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "g2p/errors.hpp"
#include "g2p/io_util.hpp"
#include "g2p/lexicon.hpp"
#include "g2p/rng.hpp"
#include "g2p/utf8.hpp"

using namespace g2p;

namespace {

std::string fixture(const std::string& name) {
  return std::string(G2P_SOURCE_DIR) + "/tests/fixtures/" + name;
}

Alphabet fa_alphabet() {
  return Alphabet::load(std::string(G2P_SOURCE_DIR) + "/data/alphabet_fa.tsv");
}

}  // namespace

TEST_CASE("lexicon parse and byte-exact round trip") {
  const std::string text = read_file(fixture("lexicon_sample.tsv"));
  auto entries = parse_lexicon(text);
  REQUIRE(entries.size() == 9);
  CHECK(entries[0].headword == "نفتالین");
  REQUIRE(entries[0].variants.size() == 2);
  CHECK(entries[0].variants[0].tag == "N1");
  CHECK(entries[0].variants[0].pron == "n/ftalin");
  CHECK_FALSE(entries[0].variants[0].is_gen);
  CHECK(entries[0].variants[1].tag == "N1GEN");
  CHECK(entries[0].variants[1].pron == "n/ftaline");
  CHECK(entries[0].variants[1].is_gen);
  CHECK(entries[5].headword == "نفتش");
  REQUIRE(entries[5].variants.size() == 1);
  CHECK(entries[5].variants[0].pron == "n/ft/$");
  CHECK(serialize_lexicon(entries) == text);
}

TEST_CASE("lexicon parse errors carry position") {
  try {
    parse_lexicon("ok\t(N1,abc)\nword\t(N1\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
    CHECK(e.column == 6);
  }
  CHECK_THROWS_AS(parse_lexicon("word no tab\n"), ParseError);
  CHECK_THROWS_AS(parse_lexicon("word\t(,abc)\n"), ParseError);
  CHECK_THROWS_AS(parse_lexicon("word\t(N1,)\n"), ParseError);
  CHECK_THROWS_AS(parse_lexicon("word\tjunk\n"), ParseError);
  CHECK_THROWS_AS(parse_lexicon("word\t\n"), ParseError);
}

TEST_CASE("gen consistency checker flags irregular forms") {
  Alphabet a = fa_alphabet();
  auto entries = parse_lexicon(
      "w1\t(N1,bad)(N1GEN,bade)\n"     // regular: d + e
      "w2\t(N1,bada)(N1GEN,badaye)\n"  // regular: vowel + ye
      "w3\t(N1,bad)(N1GEN,badoe)\n");  // irregular
  auto warnings = check_gen_consistency(entries, a);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].headword == "w3");
}

TEST_CASE("build_dicts separates homographs, exceptions, and the skiplist") {
  auto entries = parse_lexicon(read_file(fixture("lexicon_sample.tsv")));
  Dicts d = build_dicts(entries, nullptr, {});
  // Single-pronunciation entries go to the dictionary.
  CHECK(d.pron_dict.at("نفتش") == "n/ft/$");
  CHECK(d.homograph_dict.count("نفتش") == 0);
  // GEN-only entry keeps its only form.
  CHECK(d.pron_dict.at("نفتای") == "n/ftaye");
  // Entries with no GEN variant populate the skip list.
  CHECK(d.gen_skiplist.count("نفتش") == 1);
  CHECK(d.gen_skiplist.count("نفتی‌اش") == 1);
  CHECK(d.gen_skiplist.count("نفتالین") == 0);

  // A two-pronunciation word becomes a homograph unless excepted.
  auto entries2 = parse_lexicon("w\t(N1,pat)(N2,pit)\n");
  Dicts d2 = build_dicts(entries2, nullptr, {});
  CHECK(d2.pron_dict.count("w") == 0);
  REQUIRE(d2.homograph_dict.count("w") == 1);
  CHECK(d2.homograph_dict.at("w") ==
        std::vector<PhonemeSeq>{"pat", "pit"});

  // Keys partition the headword set.
  Dicts d3 = build_dicts(entries, nullptr, {});
  for (const auto& e : entries) {
    const bool in_pron = d3.pron_dict.count(e.headword) > 0;
    const bool in_homo = d3.homograph_dict.count(e.headword) > 0;
    CHECK(in_pron != in_homo);
  }
}

TEST_CASE("build_dicts picks the most frequent pron for excepted words") {
  auto entries = parse_lexicon("آسمان\t(N1,asman)(N2,aseman)\n");
  FreqTable freq;
  freq[freq_key("آسمان", "aseman")] = 10;
  freq[freq_key("آسمان", "asman")] = 3;
  Dicts d = build_dicts(entries, &freq, {"آسمان"});
  CHECK(d.pron_dict.at("آسمان") == "aseman");
  CHECK(d.homograph_dict.count("آسمان") == 0);
  // Without frequencies the first-listed form wins.
  Dicts d2 = build_dicts(entries, nullptr, {"آسمان"});
  CHECK(d2.pron_dict.at("آسمان") == "asman");
}

TEST_CASE("derive_ezafe_labels on the contrast fixture") {
  Alphabet a = fa_alphabet();
  auto entries = parse_lexicon(read_file(fixture("lexicon_contrast.tsv")));
  auto corpus = parse_corpus(read_file(fixture("corpus_contrast.tsv")));
  EzafeLabelReport rep = derive_ezafe_labels(corpus, entries, a);
  REQUIRE(rep.labels.size() == 2);
  CHECK(rep.labels[0].label == 1);  // medad + e: ezafe form
  CHECK(rep.labels[0].base_pron == "medad");
  CHECK(rep.labels[1].label == 0);  // medade is the base form
  CHECK(rep.labels[1].base_pron == "medade");
  CHECK(rep.underivable_count == 0);
}

TEST_CASE("derive_ezafe_labels derives from base when GEN is unlisted") {
  Alphabet a = fa_alphabet();
  auto entries = parse_lexicon("کتاب\t(N1,ketab)\n");
  auto corpus = parse_corpus("کتاب\tketabe\nکتاب\tketab\n");
  EzafeLabelReport rep = derive_ezafe_labels(corpus, entries, a);
  REQUIRE(rep.labels.size() == 2);
  CHECK(rep.labels[0].label == 1);
  CHECK(rep.labels[0].base_pron == "ketab");
  CHECK(rep.labels[1].label == 0);
  CHECK(rep.underivable_count == 0);
  // label 1 implies the final phoneme is "e"
  for (const auto& l : rep.labels) {
    if (l.label == 1) CHECK(l.gold_pron.back() == 'e');
  }
}

TEST_CASE("derive_ezafe_labels counts underivable words") {
  Alphabet a = fa_alphabet();
  auto entries = parse_lexicon("کتاب\t(N1,ketab)\n");
  auto corpus = parse_corpus("کتاب قلم\tketab q/l/m\n");
  EzafeLabelReport rep = derive_ezafe_labels(corpus, entries, a);
  REQUIRE(rep.labels.size() == 2);
  CHECK(rep.labels[1].label == 0);
  CHECK(rep.labels[1].underivable);
  CHECK(rep.underivable_count == 1);
}

TEST_CASE("corpus parse validates token counts") {
  auto corpus = parse_corpus("با ما\tba ma\n");
  REQUIRE(corpus.size() == 1);
  CHECK(corpus[0].tokens.size() == 2);
  CHECK(corpus[0].prons[1] == "ma");
  CHECK_THROWS_AS(parse_corpus("با ما\tba\n"), ParseError);
  CHECK_THROWS_AS(parse_corpus("با ما ba ma\n"), ParseError);
}

TEST_CASE("split_corpus arithmetic and determinism") {
  auto make_corpus = [](int n) {
    std::vector<CorpusSample> corpus;
    for (int i = 0; i < n; ++i) {
      CorpusSample s;
      s.tokens.push_back(Token{utf8::decode("w" + std::to_string(i)), false});
      s.prons.push_back("p");
      corpus.push_back(s);
    }
    return corpus;
  };
  auto c100 = make_corpus(100);
  CorpusSplit s100 = split_corpus(c100, 5);
  CHECK(s100.train.size() == 80);
  CHECK(s100.validation.size() == 5);
  CHECK(s100.test.size() == 15);

  CorpusSplit s21 = split_corpus(make_corpus(21), 5);
  CHECK(s21.train.size() == 16);
  CHECK(s21.validation.size() == 1);
  CHECK(s21.test.size() == 4);

  CHECK_THROWS_AS(split_corpus(make_corpus(19), 5), DataError);

  // Same seed twice: identical partitions; disjoint and covering.
  CorpusSplit again = split_corpus(c100, 5);
  std::set<std::string> seen;
  auto collect = [&](const std::vector<CorpusSample>& part) {
    for (const auto& s : part) seen.insert(s.tokens[0].utf8());
  };
  collect(s100.train);
  collect(s100.validation);
  collect(s100.test);
  CHECK(seen.size() == 100);
  for (size_t i = 0; i < s100.train.size(); ++i) {
    CHECK(s100.train[i].tokens[0].text == again.train[i].tokens[0].text);
  }
  CorpusSplit other_seed = split_corpus(c100, 6);
  bool same = true;
  for (size_t i = 0; i < s100.train.size(); ++i) {
    same = same &&
           s100.train[i].tokens[0].text == other_seed.train[i].tokens[0].text;
  }
  CHECK_FALSE(same);
}

TEST_CASE("oov_test_subset equals a set difference oracle") {
  Rng rng(31);
  for (int iter = 0; iter < 50; ++iter) {
    auto random_corpus = [&](int sentences) {
      std::vector<CorpusSample> corpus;
      for (int i = 0; i < sentences; ++i) {
        CorpusSample s;
        const int len = 1 + static_cast<int>(rng.below(5));
        for (int k = 0; k < len; ++k) {
          std::string w = "w" + std::to_string(rng.below(30));
          s.tokens.push_back(Token{utf8::decode(w), false});
          s.prons.push_back("p" + std::to_string(rng.below(3)));
        }
        corpus.push_back(s);
      }
      return corpus;
    };
    auto train = random_corpus(8);
    auto test = random_corpus(8);
    auto oov = oov_test_subset(test, train);

    std::set<std::string> train_vocab, test_vocab, expect;
    for (const auto& s : train) {
      for (const auto& t : s.tokens) train_vocab.insert(t.utf8());
    }
    for (const auto& s : test) {
      for (const auto& t : s.tokens) test_vocab.insert(t.utf8());
    }
    for (const auto& w : test_vocab) {
      if (!train_vocab.count(w)) expect.insert(w);
    }
    std::set<std::string> got;
    for (const auto& o : oov) got.insert(o.word);
    CHECK(got == expect);
  }
  // Degenerate cases: superset vocab and disjoint vocab.
  auto c1 = parse_corpus("a b\tx y\n");
  auto c2 = parse_corpus("a\tx\n");
  CHECK(oov_test_subset(c2, c1).empty());
  auto c3 = parse_corpus("c d\tx y\n");
  CHECK(oov_test_subset(c3, c1).size() == 2);
}
