#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace g2p {

// One symbol per phoneme, so a pronunciation is just a byte string
// ("$ek/ste" style). Phoneme symbols are required to be printable ASCII.
using PhonemeSeq = std::string;

enum class PhonemeClass { kVowel, kConsonant };

// Grapheme and phoneme inventories plus the reserved symbols every module
// shares. Reserved symbols are checked against both inventories at load.
class Alphabet {
 public:
  // Reserved text-level symbols.
  static constexpr char32_t kZwnj = 0x200C;
  static constexpr char32_t kUnkChar = 0xFFFD;  // rendering of UNK in text
  static constexpr char32_t kBorder = U'#';
  static constexpr char32_t kOpen = U'(';
  static constexpr char32_t kClose = U')';
  // Reserved vocabulary ids, shared by every model in this project.
  static constexpr int kPadId = 0;
  static constexpr int kBosId = 1;
  static constexpr int kEosId = 2;
  static constexpr int kUnkId = 3;
  static constexpr int kNumSpecialIds = 4;
  static constexpr const char* kPadText = "<PAD>";

  // File format: one record per line, "symbol<TAB>class" where class is one
  // of grapheme|punct|vowel|consonant; lines starting with '#' are comments.
  static Alphabet load(const std::string& path);
  static Alphabet parse(const std::string& contents);
  std::string serialize() const;

  const std::vector<char32_t>& graphemes() const { return graphemes_; }
  const std::vector<char>& phonemes() const { return phonemes_; }
  const std::vector<char32_t>& puncts() const { return puncts_; }

  bool is_grapheme(char32_t c) const { return grapheme_set_.count(c) > 0; }
  bool is_punct(char32_t c) const { return punct_set_.count(c) > 0; }
  bool is_phoneme(char p) const { return phoneme_class_.count(p) > 0; }

  PhonemeClass phoneme_class(char p) const;
  bool is_vowel(char p) const { return phoneme_class(p) == PhonemeClass::kVowel; }

  // True iff every symbol is in the phoneme inventory (no specials).
  bool valid_pron(const PhonemeSeq& seq) const;

  // Stable hash over the serialized inventories; stored in checkpoints so a
  // model cannot be silently run against a different alphabet.
  uint64_t fingerprint() const;

  // Model-side vocabularies: reserved ids first, inventory order after.
  int grapheme_vocab_size() const {
    return kNumSpecialIds + static_cast<int>(graphemes_.size());
  }
  int phoneme_vocab_size() const {
    return kNumSpecialIds + static_cast<int>(phonemes_.size());
  }
  int grapheme_id(char32_t c) const;  // kUnkId when out of inventory
  int phoneme_id(char p) const;       // kUnkId when out of inventory
  char32_t grapheme_at(int id) const { return graphemes_[id - kNumSpecialIds]; }
  char phoneme_at(int id) const { return phonemes_[id - kNumSpecialIds]; }

  void add_grapheme(char32_t c);
  void add_phoneme(char p, PhonemeClass cls);
  void add_punct(char32_t c);

 private:
  void check_reserved(char32_t c) const;

  std::vector<char32_t> graphemes_;
  std::vector<char> phonemes_;
  std::vector<char32_t> puncts_;
  std::unordered_set<char32_t> grapheme_set_;
  std::unordered_set<char32_t> punct_set_;
  std::unordered_map<char, PhonemeClass> phoneme_class_;
  std::unordered_map<char32_t, int> grapheme_ids_;
  std::unordered_map<char, int> phoneme_ids_;
};

}  // namespace g2p
