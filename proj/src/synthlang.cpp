#include "g2p/synthlang.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <unordered_set>

#include "g2p/errors.hpp"
#include "g2p/io_util.hpp"
#include "g2p/rng.hpp"
#include "g2p/utf8.hpp"

namespace g2p {
namespace synthlang {

namespace {

const char kVowels[] = "aeiou";
const char kConsonants[] = "bdfghklmnprstyz";

template <typename T>
T parse_num(const std::map<std::string, std::string>& kv,
            const std::string& key, T fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    if constexpr (std::is_floating_point_v<T>) {
      return static_cast<T>(std::stod(it->second));
    } else {
      return static_cast<T>(std::stoll(it->second));
    }
  } catch (const std::exception&) {
    throw DataError("bad value for " + key + ": '" + it->second + "'");
  }
}

}  // namespace

SynthSpec SynthSpec::from_kv(const std::map<std::string, std::string>& kv) {
  SynthSpec s;
  s.seed = parse_num<uint64_t>(kv, "seed", s.seed);
  s.vocab_size = parse_num<int>(kv, "vocab_size", s.vocab_size);
  s.grapheme_count = parse_num<int>(kv, "grapheme_count", s.grapheme_count);
  s.homograph_count = parse_num<int>(kv, "homograph_count", s.homograph_count);
  s.multi_pron_count = parse_num<int>(kv, "multi_pron_count", s.multi_pron_count);
  s.class_a_fraction = parse_num<double>(kv, "class_a_fraction", s.class_a_fraction);
  s.class_b_fraction = parse_num<double>(kv, "class_b_fraction", s.class_b_fraction);
  s.never_ezafe_fraction =
      parse_num<double>(kv, "never_ezafe_fraction", s.never_ezafe_fraction);
  s.sentence_count = parse_num<int>(kv, "sentence_count", s.sentence_count);
  s.min_sentence_len = parse_num<int>(kv, "min_sentence_len", s.min_sentence_len);
  s.max_sentence_len = parse_num<int>(kv, "max_sentence_len", s.max_sentence_len);
  s.bigram_rule_count = parse_num<int>(kv, "bigram_rule_count", s.bigram_rule_count);
  s.min_word_len = parse_num<int>(kv, "min_word_len", s.min_word_len);
  s.max_word_len = parse_num<int>(kv, "max_word_len", s.max_word_len);
  s.rare_band = parse_num<int>(kv, "rare_band", s.rare_band);
  s.rare_band_mass = parse_num<double>(kv, "rare_band_mass", s.rare_band_mass);
  return s;
}

SynthLang SynthLang::build(const SynthSpec& spec) {
  if (spec.grapheme_count < 4 || spec.grapheme_count > 26) {
    throw DataError("grapheme_count must be in [4, 26]");
  }
  if (spec.vocab_size < spec.homograph_count + spec.multi_pron_count + 20) {
    throw DataError("vocab_size too small for the requested special words");
  }
  SynthLang lang;
  lang.spec_ = spec;
  Rng rng(Rng::mix(spec.seed, 0x73796e74));

  // Alphabet: graphemes 'a'.. plus the fixed phoneme inventory.
  for (int i = 0; i < spec.grapheme_count; ++i) {
    lang.graphemes_.push_back(U'a' + i);
    lang.alphabet_.add_grapheme(U'a' + i);
  }
  lang.alphabet_.add_punct(U'.');
  for (const char* p = kVowels; *p; ++p) {
    lang.alphabet_.add_phoneme(*p, PhonemeClass::kVowel);
  }
  for (const char* p = kConsonants; *p; ++p) {
    lang.alphabet_.add_phoneme(*p, PhonemeClass::kConsonant);
  }

  // Word classes keyed by the first letter, so class membership is always
  // recoverable from characters alone.
  {
    std::vector<char32_t> shuffled = lang.graphemes_;
    rng.shuffle(shuffled);
    const int a_count = std::max(
        1, static_cast<int>(std::lround(spec.class_a_fraction *
                                        spec.grapheme_count)));
    const int b_count = std::max(
        1, static_cast<int>(std::lround(spec.class_b_fraction *
                                        spec.grapheme_count)));
    if (a_count + b_count >= spec.grapheme_count) {
      throw DataError("class fractions leave no neutral letters");
    }
    for (int i = 0; i < a_count; ++i) lang.a_letters_[shuffled[i]] = true;
    for (int i = 0; i < b_count; ++i) {
      lang.b_letters_[shuffled[a_count + i]] = true;
    }
  }

  // Rule table: one rule per single grapheme, plus a few two-grapheme rules
  // that win under longest match.
  auto random_phoneme = [&](bool vowel) {
    const char* set = vowel ? kVowels : kConsonants;
    const size_t n = vowel ? sizeof(kVowels) - 1 : sizeof(kConsonants) - 1;
    return set[rng.below(n)];
  };
  for (char32_t gc : lang.graphemes_) {
    PhonemeSeq out;
    switch (rng.below(6)) {
      case 0:
      case 1:
        out.push_back(random_phoneme(true));
        break;
      case 2:
      case 3:
        out.push_back(random_phoneme(false));
        break;
      case 4:
        out.push_back(random_phoneme(false));
        out.push_back(random_phoneme(true));
        break;
      default:
        out.push_back(random_phoneme(true));
        out.push_back(random_phoneme(false));
        break;
    }
    lang.rules_[std::u32string(1, gc)] = out;
  }
  for (int i = 0; i < spec.bigram_rule_count; ++i) {
    std::u32string key;
    do {
      key.clear();
      key.push_back(lang.graphemes_[rng.below(lang.graphemes_.size())]);
      key.push_back(lang.graphemes_[rng.below(lang.graphemes_.size())]);
    } while (lang.rules_.count(key));
    PhonemeSeq out;
    const int len = 1 + static_cast<int>(rng.below(3));
    for (int k = 0; k < len; ++k) {
      out.push_back(random_phoneme(rng.below(2) == 0));
    }
    lang.rules_[key] = out;
  }

  // Vocabulary: distinct words, then plant the special subsets.
  std::unordered_set<std::string> seen;
  while (static_cast<int>(lang.words_.size()) < spec.vocab_size) {
    const int len = static_cast<int>(
        rng.uniform_int(spec.min_word_len, spec.max_word_len));
    std::u32string text;
    while (static_cast<int>(text.size()) < len) {
      char32_t c = lang.graphemes_[rng.below(lang.graphemes_.size())];
      if (!text.empty() && text.back() == c) continue;  // no doubled letters
      text.push_back(c);
    }
    if (!seen.insert(utf8::encode(text)).second) continue;
    SynthWord w;
    w.text = text;
    w.pron0 = lang.apply_rules(text);
    lang.words_.push_back(std::move(w));
  }

  auto mutate_vowel = [&](const PhonemeSeq& pron) -> PhonemeSeq {
    std::vector<size_t> vowel_pos;
    for (size_t i = 0; i < pron.size(); ++i) {
      if (lang.alphabet_.is_vowel(pron[i])) vowel_pos.push_back(i);
    }
    if (vowel_pos.empty()) return {};
    PhonemeSeq out = pron;
    const size_t pos = vowel_pos[rng.below(vowel_pos.size())];
    char replacement;
    do {
      replacement = random_phoneme(true);
    } while (replacement == pron[pos]);
    out[pos] = replacement;
    return out;
  };

  // Homographs: the alternate pronunciation is a one-vowel mutation, chosen
  // when the following word is class B.
  int planted = 0;
  for (size_t i = 0; i < lang.words_.size() && planted < spec.homograph_count;
       ++i) {
    SynthWord& w = lang.words_[i];
    if (w.pron0.size() < 2) continue;
    PhonemeSeq alt = mutate_vowel(w.pron0);
    if (alt.empty()) continue;
    w.homograph = true;
    w.pron1 = alt;
    ++planted;
  }
  if (planted < spec.homograph_count) {
    throw DataError("could not plant the requested number of homographs");
  }
  // Multi-pronunciation words: free variation, same meaning; the corpus
  // always realizes the canonical form.
  planted = 0;
  for (size_t i = 0; i < lang.words_.size() && planted < spec.multi_pron_count;
       ++i) {
    SynthWord& w = lang.words_[i];
    if (w.homograph || w.pron0.size() < 2) continue;
    PhonemeSeq alt = mutate_vowel(w.pron0);
    if (alt.empty()) continue;
    w.multi_pron = true;
    w.rare_pron = alt;
    ++planted;
  }
  if (planted < spec.multi_pron_count) {
    throw DataError("could not plant the requested number of variant words");
  }
  // Words that never take the suffix.
  const int never_count = static_cast<int>(
      std::lround(spec.never_ezafe_fraction * spec.vocab_size));
  planted = 0;
  for (size_t i = 0; i < lang.words_.size() && planted < never_count; ++i) {
    SynthWord& w = lang.words_[lang.words_.size() - 1 - i];
    if (w.homograph || w.multi_pron) continue;
    w.never_ezafe = true;
    ++planted;
  }

  for (size_t i = 0; i < lang.words_.size(); ++i) {
    lang.index_[lang.words_[i].text] = i;
  }

  // Sampling weights: a Zipf-like head and a uniformly tiny rare band, with
  // the homographs pinned into the head so both contexts occur often.
  {
    const size_t n = lang.words_.size();
    std::vector<size_t> rank_of(n);
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    // Move homographs to ranks 20..; keep everything else in shuffled order.
    std::vector<size_t> homographs, rest;
    for (size_t idx : order) {
      (lang.words_[idx].homograph ? homographs : rest).push_back(idx);
    }
    std::vector<size_t> ranked;
    ranked.reserve(n);
    size_t rest_i = 0;
    for (size_t r = 0; r < n; ++r) {
      if (r >= 20 && r < 20 + homographs.size()) {
        ranked.push_back(homographs[r - 20]);
      } else {
        ranked.push_back(rest[rest_i++]);
      }
    }
    for (size_t r = 0; r < n; ++r) rank_of[ranked[r]] = r;

    const size_t rare_start =
        n > static_cast<size_t>(lang.spec_.rare_band)
            ? n - static_cast<size_t>(lang.spec_.rare_band)
            : n;
    std::vector<double> weight(n);
    double head_sum = 0;
    for (size_t i = 0; i < n; ++i) {
      const size_t r = rank_of[i];
      if (r < rare_start) {
        weight[i] = 1.0 / std::pow(static_cast<double>(r) + 10.0, 1.1);
        head_sum += weight[i];
      }
    }
    const double head_mass = 1.0 - lang.spec_.rare_band_mass;
    const double rare_each =
        rare_start < n ? lang.spec_.rare_band_mass / (n - rare_start) : 0.0;
    double acc = 0;
    lang.cumulative_.resize(n);
    for (size_t i = 0; i < n; ++i) {
      const size_t r = rank_of[i];
      const double p =
          r < rare_start ? weight[i] / head_sum * head_mass : rare_each;
      acc += p;
      lang.cumulative_[i] = acc;
    }
    lang.cumulative_.back() = 1.0;
  }

  // Self-checks: per headword, GEN forms must not collide with base forms.
  for (const SynthWord& w : lang.words_) {
    std::vector<PhonemeSeq> bases = {w.pron0};
    if (w.homograph) bases.push_back(w.pron1);
    if (w.multi_pron) bases.push_back(w.rare_pron);
    for (const PhonemeSeq& b : bases) {
      const PhonemeSeq gen = ezafe_extend(b, lang.alphabet_);
      for (const PhonemeSeq& other : bases) {
        if (gen == other) {
          throw DataError("generation collision: GEN form equals a base form");
        }
      }
    }
  }
  return lang;
}

const SynthWord* SynthLang::find(const std::u32string& text) const {
  auto it = index_.find(text);
  return it == index_.end() ? nullptr : &words_[it->second];
}

PhonemeSeq SynthLang::apply_rules(const std::u32string& text) const {
  PhonemeSeq out;
  size_t i = 0;
  while (i < text.size()) {
    if (i + 1 < text.size()) {
      auto it = rules_.find(text.substr(i, 2));
      if (it != rules_.end()) {
        out += it->second;
        i += 2;
        continue;
      }
    }
    auto it = rules_.find(text.substr(i, 1));
    if (it == rules_.end()) {
      throw DataError("no rule for grapheme " + utf8::encode(text[i]));
    }
    out += it->second;
    i += 1;
  }
  return out;
}

bool SynthLang::class_a(const std::u32string& text) const {
  return !text.empty() && a_letters_.count(text[0]) > 0;
}

bool SynthLang::class_b(const std::u32string& text) const {
  return !text.empty() && b_letters_.count(text[0]) > 0;
}

PhonemeSeq SynthLang::oracle_word(const SynthWord& word,
                                  const std::u32string* next) const {
  PhonemeSeq base = word.pron0;
  if (word.homograph && next && class_b(*next)) base = word.pron1;
  if (next && class_a(*next) && !word.never_ezafe) {
    base = ezafe_extend(base, alphabet_);
  }
  return base;
}

std::vector<PhonemeSeq> SynthLang::oracle(
    const std::vector<std::u32string>& sentence) const {
  std::vector<PhonemeSeq> out;
  out.reserve(sentence.size());
  for (size_t i = 0; i < sentence.size(); ++i) {
    const SynthWord* w = find(sentence[i]);
    if (!w) {
      throw DataError("oracle: out-of-vocabulary token " +
                      utf8::encode(sentence[i]));
    }
    const std::u32string* next =
        i + 1 < sentence.size() ? &sentence[i + 1] : nullptr;
    out.push_back(oracle_word(*w, next));
  }
  return out;
}

std::vector<CorpusSample> SynthLang::generate_corpus() const {
  Rng rng(Rng::mix(spec_.seed, 0x636f7270));
  std::vector<CorpusSample> corpus;
  corpus.reserve(spec_.sentence_count);
  auto sample_word = [&]() -> const SynthWord& {
    const double u = rng.next_double();
    const auto it =
        std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
    const size_t idx = std::min(
        static_cast<size_t>(it - cumulative_.begin()), words_.size() - 1);
    return words_[idx];
  };
  for (int s = 0; s < spec_.sentence_count; ++s) {
    const int len = static_cast<int>(
        rng.uniform_int(spec_.min_sentence_len, spec_.max_sentence_len));
    CorpusSample sample;
    std::vector<std::u32string> texts;
    for (int k = 0; k < len; ++k) {
      const SynthWord& w = sample_word();
      texts.push_back(w.text);
      sample.tokens.push_back(Token{w.text, false});
    }
    sample.prons = oracle(texts);
    corpus.push_back(std::move(sample));
  }
  return corpus;
}

std::vector<LexiconEntry> SynthLang::lexicon() const {
  std::vector<LexiconEntry> entries;
  entries.reserve(words_.size());
  for (const SynthWord& w : words_) {
    LexiconEntry e;
    e.headword = utf8::encode(w.text);
    std::vector<PhonemeSeq> bases = {w.pron0};
    if (w.homograph) bases.push_back(w.pron1);
    if (w.multi_pron) {
      // List the alternate first: picking the common form is the frequency
      // table's job, not the listing order's.
      bases = {w.rare_pron, w.pron0};
    }
    for (size_t i = 0; i < bases.size(); ++i) {
      const std::string tag = "N" + std::to_string(i + 1);
      e.variants.push_back({tag, bases[i], false});
      if (!w.never_ezafe) {
        e.variants.push_back(
            {tag + "GEN", ezafe_extend(bases[i], alphabet_), true});
      }
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<std::string> SynthLang::exception_words() const {
  std::vector<std::string> out;
  for (const SynthWord& w : words_) {
    if (w.multi_pron) out.push_back(utf8::encode(w.text));
  }
  return out;
}

FreqTable SynthLang::variant_freq() const {
  FreqTable freq;
  for (const SynthWord& w : words_) {
    if (w.multi_pron) {
      freq[freq_key(utf8::encode(w.text), w.pron0)] = 90;
      freq[freq_key(utf8::encode(w.text), w.rare_pron)] = 30;
    }
  }
  return freq;
}

std::vector<std::u32string> SynthLang::fresh_words(int count,
                                                   uint64_t seed) const {
  Rng rng(Rng::mix(seed, 0x66726573));
  std::vector<std::u32string> out;
  std::unordered_set<std::string> used;
  while (static_cast<int>(out.size()) < count) {
    const int len = static_cast<int>(
        rng.uniform_int(spec_.min_word_len, spec_.max_word_len));
    std::u32string text;
    while (static_cast<int>(text.size()) < len) {
      char32_t c = graphemes_[rng.below(graphemes_.size())];
      if (!text.empty() && text.back() == c) continue;
      text.push_back(c);
    }
    if (index_.count(text) || !used.insert(utf8::encode(text)).second) {
      continue;
    }
    out.push_back(text);
  }
  return out;
}

GeneratedFiles generate_to_dir(const SynthSpec& spec,
                               const std::string& out_dir) {
  SynthLang lang = SynthLang::build(spec);
  std::filesystem::create_directories(out_dir);
  GeneratedFiles files;
  files.alphabet_path = out_dir + "/alphabet.tsv";
  files.lexicon_path = out_dir + "/lexicon.tsv";
  files.corpus_path = out_dir + "/corpus.tsv";
  files.exceptions_path = out_dir + "/exceptions.tsv";
  files.freq_path = out_dir + "/freq.tsv";

  write_file_atomic(files.alphabet_path, lang.alphabet().serialize());
  write_file_atomic(files.lexicon_path, serialize_lexicon(lang.lexicon()));

  std::vector<CorpusSample> corpus = lang.generate_corpus();
  write_file_atomic(files.corpus_path, serialize_corpus(corpus));

  std::string exceptions;
  for (const std::string& w : lang.exception_words()) exceptions += w + "\n";
  write_file_atomic(files.exceptions_path, exceptions);
  write_file_atomic(files.freq_path, serialize_freq_table(lang.variant_freq()));

  // Generation self-check: the emitted corpus must survive a reparse and
  // re-derivation from the emitted lexicon with nothing underivable.
  std::vector<CorpusSample> reread =
      parse_corpus(read_file(files.corpus_path));
  if (reread.size() != corpus.size()) {
    throw DataError("generated corpus failed to round-trip");
  }
  auto entries = parse_lexicon(read_file(files.lexicon_path));
  EzafeLabelReport labels =
      derive_ezafe_labels(reread, entries, lang.alphabet());
  if (labels.underivable_count != 0) {
    throw DataError("generated corpus has underivable ezafe labels");
  }
  return files;
}

}  // namespace synthlang
}  // namespace g2p
