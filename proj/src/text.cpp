#include "g2p/text.hpp"

#include "g2p/errors.hpp"
#include "g2p/io_util.hpp"
#include "g2p/utf8.hpp"

namespace g2p {

std::string Token::utf8() const { return utf8::encode(text); }

void NormTable::add(char32_t from, const std::u32string& to) {
  if (map_.count(from)) {
    throw DataError("duplicate normalization rule for " + utf8::encode(from));
  }
  map_[from] = to;
}

const std::u32string* NormTable::find(char32_t c) const {
  auto it = map_.find(c);
  return it == map_.end() ? nullptr : &it->second;
}

NormTable NormTable::parse(const std::string& contents) {
  NormTable t;
  int lineno = 0;
  for (const std::string& raw : split_lines(contents)) {
    ++lineno;
    if (raw.empty() || raw[0] == '#') continue;
    auto cols = split(raw, '\t');
    if (cols.size() != 2) {
      throw ParseError("normalization record needs from<TAB>to", lineno, 1);
    }
    std::u32string from = utf8::decode(cols[0]);
    if (from.size() != 1) {
      throw ParseError("normalization source must be a single character",
                       lineno, 1);
    }
    t.add(from[0], utf8::decode(cols[1]));
  }
  // Targets must be fixed points, otherwise normalization is not one-pass.
  for (const auto& [from, to] : t.map_) {
    for (char32_t c : to) {
      if (t.map_.count(c)) {
        throw DataError("normalization target " + utf8::encode(c) +
                        " is itself rewritten; table must be canonical");
      }
    }
  }
  return t;
}

NormTable NormTable::load(const std::string& path) {
  return parse(read_file(path));
}

namespace {

bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == 0x00A0;
}

}  // namespace

NormalizeResult normalize(const std::u32string& raw, const Alphabet& alphabet,
                          const NormTable& table) {
  // Pass 1: rewrite table, then classify each character.
  std::u32string mapped;
  mapped.reserve(raw.size());
  for (char32_t c : raw) {
    if (const std::u32string* to = table.find(c)) {
      mapped += *to;
    } else {
      mapped.push_back(c);
    }
  }

  NormalizeResult res;
  res.text.reserve(mapped.size());
  auto out_back = [&]() -> char32_t {
    return res.text.empty() ? 0 : res.text.back();
  };
  for (size_t i = 0; i < mapped.size(); ++i) {
    char32_t c = mapped[i];
    if (is_space(c)) {
      if (!res.text.empty() && out_back() != U' ') {
        if (out_back() == Alphabet::kZwnj) res.text.pop_back();  // ZWNJ at edge
        if (!res.text.empty() && out_back() != U' ') res.text.push_back(U' ');
      }
      continue;
    }
    if (c == Alphabet::kZwnj) {
      // Keep only between two joined (non-space) characters.
      if (res.text.empty() || out_back() == U' ' || out_back() == Alphabet::kZwnj) {
        continue;
      }
      res.text.push_back(c);
      continue;
    }
    if (alphabet.is_grapheme(c) || alphabet.is_punct(c) ||
        c == Alphabet::kUnkChar) {
      res.text.push_back(c);
    } else {
      res.text.push_back(Alphabet::kUnkChar);
      ++res.unk_count;
    }
  }
  // Trailing space / dangling ZWNJ.
  while (!res.text.empty() &&
         (res.text.back() == U' ' || res.text.back() == Alphabet::kZwnj)) {
    res.text.pop_back();
  }
  return res;
}

NormalizeResult normalize_utf8(const std::string& raw, const Alphabet& alphabet,
                               const NormTable& table) {
  return normalize(utf8::decode(raw), alphabet, table);
}

std::vector<Token> tokenize(const std::u32string& normalized,
                            const Alphabet& alphabet) {
  std::vector<Token> tokens;
  std::u32string cur;
  auto flush = [&]() {
    if (!cur.empty()) {
      tokens.push_back(Token{cur, false});
      cur.clear();
    }
  };
  for (char32_t c : normalized) {
    if (c == U' ') {
      flush();
    } else if (alphabet.is_punct(c)) {
      flush();
      tokens.push_back(Token{std::u32string(1, c), true});
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return tokens;
}

std::vector<Window5> make_windows(const std::vector<Token>& tokens,
                                  bool include_punct) {
  std::vector<const Token*> words;
  for (const Token& t : tokens) {
    if (include_punct || !t.is_punct) words.push_back(&t);
  }
  std::vector<Window5> windows;
  windows.reserve(words.size());
  const std::u32string pad = utf8::decode(Alphabet::kPadText);
  for (int i = 0; i < static_cast<int>(words.size()); ++i) {
    Window5 w;
    for (int k = -2; k <= 2; ++k) {
      int j = i + k;
      int slot = k + 2;
      if (j < 0 || j >= static_cast<int>(words.size())) {
        w.words[slot] = pad;
        w.pad_mask[slot] = true;
      } else {
        w.words[slot] = words[j]->text;
        w.pad_mask[slot] = false;
      }
    }
    windows.push_back(std::move(w));
  }
  return windows;
}

}  // namespace g2p
