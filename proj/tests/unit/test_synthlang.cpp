#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <unordered_set>

#include "g2p/errors.hpp"
#include "g2p/io_util.hpp"
#include "g2p/synthlang.hpp"
#include "g2p/utf8.hpp"

using namespace g2p;
using namespace g2p::synthlang;

namespace {

SynthSpec small_spec() {
  SynthSpec spec;
  spec.vocab_size = 120;
  spec.sentence_count = 400;
  spec.homograph_count = 4;
  spec.multi_pron_count = 2;
  spec.rare_band = 20;
  return spec;
}

std::string temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(p);
  return p.string();
}

}  // namespace

TEST_CASE("generation is deterministic byte for byte") {
  SynthSpec spec = small_spec();
  auto d1 = temp_dir("synth_det1");
  auto d2 = temp_dir("synth_det2");
  GeneratedFiles f1 = generate_to_dir(spec, d1);
  GeneratedFiles f2 = generate_to_dir(spec, d2);
  CHECK(read_file(f1.alphabet_path) == read_file(f2.alphabet_path));
  CHECK(read_file(f1.lexicon_path) == read_file(f2.lexicon_path));
  CHECK(read_file(f1.corpus_path) == read_file(f2.corpus_path));
  CHECK(read_file(f1.exceptions_path) == read_file(f2.exceptions_path));
  CHECK(read_file(f1.freq_path) == read_file(f2.freq_path));
  // A different seed changes the corpus.
  SynthSpec other = spec;
  other.seed = spec.seed + 1;
  auto d3 = temp_dir("synth_det3");
  GeneratedFiles f3 = generate_to_dir(other, d3);
  CHECK(read_file(f1.corpus_path) != read_file(f3.corpus_path));
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d2);
  std::filesystem::remove_all(d3);
}

TEST_CASE("zero homographs produce an empty homograph dictionary") {
  SynthSpec spec = small_spec();
  spec.homograph_count = 0;
  SynthLang lang = SynthLang::build(spec);
  std::unordered_set<std::string> exceptions;
  for (const std::string& w : lang.exception_words()) exceptions.insert(w);
  Dicts d = build_dicts(lang.lexicon(), nullptr, exceptions);
  CHECK(d.homograph_dict.empty());
}

TEST_CASE("corpus gold matches the oracle and homograph rule") {
  SynthSpec spec = small_spec();
  SynthLang lang = SynthLang::build(spec);
  auto corpus = lang.generate_corpus();
  REQUIRE(corpus.size() == static_cast<size_t>(spec.sentence_count));
  int homograph_hits = 0, alt_hits = 0, ezafe_hits = 0;
  for (const CorpusSample& s : corpus) {
    std::vector<std::u32string> texts;
    for (const Token& t : s.tokens) texts.push_back(t.text);
    auto gold = lang.oracle(texts);
    REQUIRE(gold.size() == s.prons.size());
    for (size_t i = 0; i < gold.size(); ++i) {
      CHECK(gold[i] == s.prons[i]);
      const SynthWord* w = lang.find(texts[i]);
      REQUIRE(w != nullptr);
      if (w->homograph) {
        ++homograph_hits;
        const bool alt = i + 1 < texts.size() && lang.class_b(texts[i + 1]);
        const PhonemeSeq base = alt ? w->pron1 : w->pron0;
        if (alt) ++alt_hits;
        // The pron is the selected base, possibly ezafe-extended.
        CHECK((s.prons[i] == base ||
               s.prons[i] == ezafe_extend(base, lang.alphabet())));
      }
      if (i + 1 < texts.size() && lang.class_a(texts[i + 1]) &&
          !w->never_ezafe) {
        ++ezafe_hits;
        CHECK(s.prons[i].back() == 'e');
      }
    }
  }
  CHECK(homograph_hits > 50);   // both planted behaviors exercised
  CHECK(alt_hits > 10);
  CHECK(ezafe_hits > 100);
  // Homographs in both contexts produce two different prons.
  const SynthWord* h = nullptr;
  for (const auto& w : lang.words()) {
    if (w.homograph) {
      h = &w;
      break;
    }
  }
  REQUIRE(h != nullptr);
  CHECK(h->pron0 != h->pron1);
  // Sentence-final homographs take the canonical pron (next is absent).
  CHECK(lang.oracle({h->text}) == std::vector<PhonemeSeq>{h->pron0});
}

TEST_CASE("oracle rejects out-of-vocabulary tokens") {
  SynthLang lang = SynthLang::build(small_spec());
  CHECK_THROWS_AS(lang.oracle({U"zzzzzzzz"}), DataError);
}

TEST_CASE("five-gram sufficiency: the gold pron depends only on the window") {
  // The transcription of a word is a function of (word, next word) alone,
  // both inside any window centered on the word. Checked exhaustively over
  // word pairs on a small vocabulary.
  SynthSpec spec = small_spec();
  spec.vocab_size = 60;
  SynthLang lang = SynthLang::build(spec);
  for (const SynthWord& w : lang.words()) {
    for (const SynthWord& next : lang.words()) {
      const PhonemeSeq direct = lang.oracle_word(w, &next.text);
      // Any sentence embedding of the pair yields the same transcription.
      auto gold1 = lang.oracle({w.text, next.text});
      auto gold2 = lang.oracle({next.text, w.text, next.text, w.text});
      CHECK(gold1[0] == direct);
      CHECK(gold2[1] == direct);
    }
  }
}

TEST_CASE("generated artifacts parse and label cleanly") {
  SynthSpec spec = small_spec();
  auto dir = temp_dir("synth_files");
  GeneratedFiles f = generate_to_dir(spec, dir);
  Alphabet alphabet = Alphabet::load(f.alphabet_path);
  auto entries = load_lexicon(f.lexicon_path);
  auto corpus = load_corpus(f.corpus_path);
  auto exceptions = parse_word_set(read_file(f.exceptions_path));
  auto freq = parse_freq_table(read_file(f.freq_path));
  CHECK(entries.size() == static_cast<size_t>(spec.vocab_size));
  CHECK(exceptions.size() == static_cast<size_t>(spec.multi_pron_count));
  CHECK(freq.size() == static_cast<size_t>(2 * spec.multi_pron_count));

  // Byte-exact lexicon round trip.
  CHECK(serialize_lexicon(entries) == read_file(f.lexicon_path));

  // No GEN irregularities by construction.
  CHECK(check_gen_consistency(entries, alphabet).empty());

  // Zero underivable ezafe labels.
  EzafeLabelReport labels = derive_ezafe_labels(corpus, entries, alphabet);
  CHECK(labels.underivable_count == 0);

  // Dictionaries: homographs and exceptions land where they belong.
  Dicts d = build_dicts(entries, &freq, exceptions);
  SynthLang lang = SynthLang::build(spec);
  for (const SynthWord& w : lang.words()) {
    const std::string word = utf8::encode(w.text);
    if (w.homograph) {
      CHECK(d.homograph_dict.count(word) == 1);
    } else {
      CHECK(d.pron_dict.count(word) == 1);
      if (w.multi_pron) {
        // The frequency table selects the canonical form even though the
        // rare variant is listed first.
        CHECK(d.pron_dict.at(word) == w.pron0);
      }
      CHECK(d.gen_skiplist.count(word) == (w.never_ezafe ? 1 : 0));
    }
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("fresh words are outside the vocabulary and rule-transcribable") {
  SynthLang lang = SynthLang::build(small_spec());
  auto fresh = lang.fresh_words(50, 9);
  std::unordered_set<std::string> seen;
  for (const auto& w : fresh) {
    CHECK(lang.find(w) == nullptr);
    CHECK(seen.insert(utf8::encode(w)).second);
    CHECK(!lang.apply_rules(w).empty());
  }
  // Deterministic given the seed.
  auto again = lang.fresh_words(50, 9);
  CHECK(fresh == again);
}
