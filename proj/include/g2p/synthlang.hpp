#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "g2p/alphabet.hpp"
#include "g2p/lexicon.hpp"
#include "g2p/text.hpp"

namespace g2p {
namespace synthlang {

// Deterministic synthetic language: a rule-based grapheme-to-phoneme mapping
// (longest match), planted homographs whose pronunciation is selected by the
// class of the following word, and an ezafe-like suffix triggered by a
// class-A follower. Word classes are decidable from the first letter, so
// every planted decision is recoverable from a 5-gram window.
struct SynthSpec {
  uint64_t seed = 7;
  int vocab_size = 500;
  int grapheme_count = 26;  // drawn from 'a'..'z'
  int homograph_count = 10;
  int multi_pron_count = 5;
  double class_a_fraction = 0.30;
  double class_b_fraction = 0.30;
  double never_ezafe_fraction = 0.10;
  int sentence_count = 20000;
  int min_sentence_len = 4;
  int max_sentence_len = 11;
  int bigram_rule_count = 8;
  int min_word_len = 2;
  int max_word_len = 6;
  int rare_band = 100;           // lowest-frequency words
  double rare_band_mass = 0.008; // total probability of the rare band

  static SynthSpec from_kv(const std::map<std::string, std::string>& kv);
};

struct SynthWord {
  std::u32string text;
  PhonemeSeq pron0;          // canonical pronunciation
  PhonemeSeq pron1;          // homograph alternate (empty otherwise)
  PhonemeSeq rare_pron;      // multi-pronunciation alternate (empty otherwise)
  bool homograph = false;
  bool multi_pron = false;
  bool never_ezafe = false;
};

class SynthLang {
 public:
  static SynthLang build(const SynthSpec& spec);

  const SynthSpec& spec() const { return spec_; }
  const Alphabet& alphabet() const { return alphabet_; }
  const std::vector<SynthWord>& words() const { return words_; }
  const SynthWord* find(const std::u32string& text) const;

  // Longest-match application of the grapheme rules.
  PhonemeSeq apply_rules(const std::u32string& text) const;

  bool class_a(const std::u32string& text) const;  // ezafe trigger
  bool class_b(const std::u32string& text) const;  // homograph trigger

  // Rule-determined transcription of a vocabulary sentence; out-of-vocabulary
  // tokens are an error.
  std::vector<PhonemeSeq> oracle(
      const std::vector<std::u32string>& sentence) const;

  // The per-word transcription rule, exposed for targeted probes: `next`
  // null at sentence end.
  PhonemeSeq oracle_word(const SynthWord& word, const std::u32string* next) const;

  std::vector<CorpusSample> generate_corpus() const;
  std::vector<LexiconEntry> lexicon() const;
  std::vector<std::string> exception_words() const;
  FreqTable variant_freq() const;

  // Well-formed words absent from the vocabulary, for unseen-word probes.
  std::vector<std::u32string> fresh_words(int count, uint64_t seed) const;

 private:
  SynthSpec spec_;
  Alphabet alphabet_;
  std::vector<char32_t> graphemes_;
  std::unordered_map<char32_t, bool> a_letters_;
  std::unordered_map<char32_t, bool> b_letters_;
  std::map<std::u32string, PhonemeSeq> rules_;  // 1- and 2-grapheme keys
  std::vector<SynthWord> words_;
  std::unordered_map<std::u32string, size_t> index_;
  std::vector<double> cumulative_;  // sampling distribution over words_
};

struct GeneratedFiles {
  std::string alphabet_path;
  std::string lexicon_path;
  std::string corpus_path;
  std::string exceptions_path;
  std::string freq_path;
};

// Writes alphabet.tsv, lexicon.tsv, corpus.tsv, exceptions.tsv and freq.tsv
// under out_dir; byte-identical for identical specs.
GeneratedFiles generate_to_dir(const SynthSpec& spec, const std::string& out_dir);

}  // namespace synthlang
}  // namespace g2p
