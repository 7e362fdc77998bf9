#include "g2p/alphabet.hpp"

#include "g2p/errors.hpp"
#include "g2p/io_util.hpp"
#include "g2p/utf8.hpp"

namespace g2p {

namespace {

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

void Alphabet::check_reserved(char32_t c) const {
  if (c == kBorder || c == kOpen || c == kClose || c == kUnkChar || c == kZwnj) {
    throw DataError("alphabet symbol collides with a reserved symbol: " +
                    utf8::encode(c));
  }
}

void Alphabet::add_grapheme(char32_t c) {
  check_reserved(c);
  if (grapheme_set_.count(c) || punct_set_.count(c)) {
    throw DataError("duplicate alphabet symbol: " + utf8::encode(c));
  }
  grapheme_ids_[c] = grapheme_vocab_size();
  graphemes_.push_back(c);
  grapheme_set_.insert(c);
}

void Alphabet::add_phoneme(char p, PhonemeClass cls) {
  if (static_cast<unsigned char>(p) < 0x21 || static_cast<unsigned char>(p) > 0x7E) {
    throw DataError("phoneme symbols must be printable ASCII, got byte " +
                    std::to_string(static_cast<int>(static_cast<unsigned char>(p))));
  }
  check_reserved(static_cast<char32_t>(p));
  if (phoneme_class_.count(p)) {
    throw DataError(std::string("duplicate phoneme symbol: ") + p);
  }
  phoneme_ids_[p] = phoneme_vocab_size();
  phonemes_.push_back(p);
  phoneme_class_[p] = cls;
}

void Alphabet::add_punct(char32_t c) {
  check_reserved(c);
  if (grapheme_set_.count(c) || punct_set_.count(c)) {
    throw DataError("duplicate alphabet symbol: " + utf8::encode(c));
  }
  puncts_.push_back(c);
  punct_set_.insert(c);
}

PhonemeClass Alphabet::phoneme_class(char p) const {
  auto it = phoneme_class_.find(p);
  if (it == phoneme_class_.end()) {
    throw DataError(std::string("not a phoneme symbol: ") + p);
  }
  return it->second;
}

bool Alphabet::valid_pron(const PhonemeSeq& seq) const {
  for (char p : seq) {
    if (!phoneme_class_.count(p)) return false;
  }
  return true;
}

int Alphabet::grapheme_id(char32_t c) const {
  auto it = grapheme_ids_.find(c);
  return it == grapheme_ids_.end() ? kUnkId : it->second;
}

int Alphabet::phoneme_id(char p) const {
  auto it = phoneme_ids_.find(p);
  return it == phoneme_ids_.end() ? kUnkId : it->second;
}

Alphabet Alphabet::parse(const std::string& contents) {
  Alphabet a;
  int lineno = 0;
  for (const std::string& raw : split_lines(contents)) {
    ++lineno;
    if (raw.empty() || raw[0] == '#') continue;
    auto cols = split(raw, '\t');
    if (cols.size() != 2) {
      throw ParseError("alphabet record needs symbol<TAB>class", lineno, 1);
    }
    std::u32string sym = utf8::decode(cols[0]);
    if (sym.size() != 1) {
      throw ParseError("alphabet symbol must be a single character", lineno, 1);
    }
    const std::string& cls = cols[1];
    if (cls == "grapheme") {
      a.add_grapheme(sym[0]);
    } else if (cls == "punct") {
      a.add_punct(sym[0]);
    } else if (cls == "vowel" || cls == "consonant") {
      if (sym[0] > 0x7E) {
        throw ParseError("phoneme symbols must be single ASCII characters",
                         lineno, 1);
      }
      a.add_phoneme(static_cast<char>(sym[0]), cls == "vowel"
                                                   ? PhonemeClass::kVowel
                                                   : PhonemeClass::kConsonant);
    } else {
      throw ParseError("unknown symbol class '" + cls + "'", lineno,
                       static_cast<int>(cols[0].size()) + 2);
    }
  }
  if (a.graphemes_.empty()) throw DataError("alphabet has no graphemes");
  if (a.phonemes_.empty()) throw DataError("alphabet has no phonemes");
  return a;
}

Alphabet Alphabet::load(const std::string& path) {
  return parse(read_file(path));
}

std::string Alphabet::serialize() const {
  std::string out;
  for (char32_t c : graphemes_) out += utf8::encode(c) + "\tgrapheme\n";
  for (char32_t c : puncts_) out += utf8::encode(c) + "\tpunct\n";
  for (char p : phonemes_) {
    out += std::string(1, p) + "\t" +
           (phoneme_class_.at(p) == PhonemeClass::kVowel ? "vowel" : "consonant") +
           "\n";
  }
  return out;
}

uint64_t Alphabet::fingerprint() const { return fnv1a64(serialize()); }

}  // namespace g2p
