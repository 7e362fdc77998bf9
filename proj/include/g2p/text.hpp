#pragma once

#include <array>
#include <string>
#include <unordered_map>
#include <vector>

#include "g2p/alphabet.hpp"

namespace g2p {

struct Token {
  std::u32string text;
  bool is_punct = false;

  std::string utf8() const;
  bool operator==(const Token&) const = default;
};

// 5-token context window; position 2 is the target and is never a PAD.
struct Window5 {
  std::array<std::u32string, 5> words;
  std::array<bool, 5> pad_mask{};  // true where the slot is a PAD sentinel

  static constexpr int kTarget = 2;
  const std::u32string& target() const { return words[kTarget]; }
  bool operator==(const Window5&) const = default;
};

// Character rewrite table applied before inventory checks (Arabic presentation
// forms to canonical letters, digit unification, ...).
// File format: "from<TAB>to" per line, '#' starts a comment; `to` may be empty
// (deletion) or several characters.
class NormTable {
 public:
  static NormTable load(const std::string& path);
  static NormTable parse(const std::string& contents);
  NormTable() = default;

  void add(char32_t from, const std::u32string& to);
  const std::u32string* find(char32_t c) const;
  size_t size() const { return map_.size(); }

 private:
  std::unordered_map<char32_t, std::u32string> map_;
};

struct NormalizeResult {
  std::u32string text;
  int unk_count = 0;
};

// Total function: rewrites via the table, collapses whitespace runs, keeps
// ZWNJ only between joined letters, and replaces anything outside the
// inventory with the UNK character (counted, never fatal).
NormalizeResult normalize(const std::u32string& raw, const Alphabet& alphabet,
                          const NormTable& table);
NormalizeResult normalize_utf8(const std::string& raw, const Alphabet& alphabet,
                               const NormTable& table);

// Splits on spaces; punctuation characters become their own tokens.
std::vector<Token> tokenize(const std::u32string& normalized,
                            const Alphabet& alphabet);

// One window per word token, PAD-filled at sentence bounds. Punctuation is
// excluded from windows unless include_punct is set.
std::vector<Window5> make_windows(const std::vector<Token>& tokens,
                                  bool include_punct = false);

}  // namespace g2p
