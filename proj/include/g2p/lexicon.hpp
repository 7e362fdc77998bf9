#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "g2p/alphabet.hpp"
#include "g2p/text.hpp"

namespace g2p {

struct PronVariant {
  std::string tag;     // e.g. "N1", "N1GEN", "A0"
  PhonemeSeq pron;
  bool is_gen = false; // tag ends in "GEN": ezafe-suffixed form

  bool operator==(const PronVariant&) const = default;
};

struct LexiconEntry {
  std::string headword;  // UTF-8
  std::vector<PronVariant> variants;

  bool operator==(const LexiconEntry&) const = default;
};

// One entry per line: headword TAB (TAG,PRON)(TAG,PRON)...
std::vector<LexiconEntry> parse_lexicon(const std::string& contents);
std::string serialize_lexicon(const std::vector<LexiconEntry>& entries);

std::vector<LexiconEntry> load_lexicon(const std::string& path);

// Irregular GEN forms are reported, not fatal.
struct LexiconWarning {
  std::string headword;
  std::string message;
};
std::vector<LexiconWarning> check_gen_consistency(
    const std::vector<LexiconEntry>& entries, const Alphabet& alphabet);

using PronDict = std::unordered_map<std::string, PhonemeSeq>;
// Ordered list of distinct non-GEN pronunciations per homograph.
using HomographDict = std::unordered_map<std::string, std::vector<PhonemeSeq>>;

// (headword, pron) -> occurrence count, used to pick the most common
// pronunciation of multi-pronunciation words.
using FreqTable = std::unordered_map<std::string, uint64_t>;
std::string freq_key(const std::string& headword, const PhonemeSeq& pron);
FreqTable parse_freq_table(const std::string& contents);
std::string serialize_freq_table(const FreqTable& freq);

std::unordered_set<std::string> parse_word_set(const std::string& contents);

struct Dicts {
  PronDict pron_dict;
  HomographDict homograph_dict;
  std::unordered_set<std::string> gen_skiplist;  // headwords with no GEN form
};

// Headwords with >=2 distinct non-GEN pronunciations become homographs unless
// listed in `exceptions` (multi-pronunciation same-meaning words), which go to
// the pronunciation dictionary under their most frequent pronunciation
// (first-listed when no frequency is known).
Dicts build_dicts(const std::vector<LexiconEntry>& entries,
                  const FreqTable* freq,
                  const std::unordered_set<std::string>& exceptions);

// A sentence with per-token gold pronunciations (ezafe realized in the
// phoneme string when present).
struct CorpusSample {
  std::vector<Token> tokens;
  std::vector<PhonemeSeq> prons;
};

// TSV: grapheme tokens space-joined TAB per-token phoneme strings space-joined.
std::vector<CorpusSample> parse_corpus(const std::string& contents);
std::string serialize_corpus(const std::vector<CorpusSample>& corpus);
std::vector<CorpusSample> load_corpus(const std::string& path);

struct CorpusSplit {
  std::vector<CorpusSample> train;
  std::vector<CorpusSample> validation;
  std::vector<CorpusSample> test;
};

// Seeded shuffle then 80/5/15 by sentence count; train and validation take
// floors, test takes the remainder. Fewer than 20 sentences is an error.
CorpusSplit split_corpus(const std::vector<CorpusSample>& corpus, uint64_t seed);

struct EzafeLabel {
  Window5 window;
  int label = 0;             // 1 iff the target word carries ezafe
  PhonemeSeq base_pron;      // gold pron with any ezafe suffix removed
  PhonemeSeq gold_pron;      // gold pron as transcribed
  bool underivable = false;
};

struct EzafeLabelReport {
  std::vector<EzafeLabel> labels;
  int underivable_count = 0;
};

// Labels each corpus word by comparing its gold pronunciation against the
// lexicon's GEN and base forms for that grapheme; for unlisted words, a
// stripped candidate base must be attested for the same grapheme elsewhere
// in the corpus. The grapheme is part of the key: identical phoneme strings
// under different graphemes may label differently.
EzafeLabelReport derive_ezafe_labels(const std::vector<CorpusSample>& corpus,
                                     const std::vector<LexiconEntry>& entries,
                                     const Alphabet& alphabet);

// Appends the ezafe suffix ("e" after consonants, "ye" after vowels).
PhonemeSeq ezafe_extend(const PhonemeSeq& base, const Alphabet& alphabet);

struct OovWord {
  std::string word;
  std::vector<PhonemeSeq> gold_prons;
};

// Test words absent from the train vocabulary, with their gold prons.
std::vector<OovWord> oov_test_subset(const std::vector<CorpusSample>& test,
                                     const std::vector<CorpusSample>& train);

// Counts (headword, pron) pairs over a corpus; feeds build_dicts.
FreqTable count_corpus_freq(const std::vector<CorpusSample>& corpus);

}  // namespace g2p
