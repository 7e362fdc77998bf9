#include "g2p/lexicon.hpp"

#include <algorithm>

#include "g2p/errors.hpp"
#include "g2p/io_util.hpp"
#include "g2p/rng.hpp"
#include "g2p/utf8.hpp"

namespace g2p {

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::vector<LexiconEntry> parse_lexicon(const std::string& contents) {
  std::vector<LexiconEntry> entries;
  int lineno = 0;
  for (const std::string& line : split_lines(contents)) {
    ++lineno;
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError("missing TAB after headword", lineno,
                       static_cast<int>(line.size()) + 1);
    }
    if (tab == 0) throw ParseError("empty headword", lineno, 1);
    LexiconEntry entry;
    entry.headword = line.substr(0, tab);
    size_t i = tab + 1;
    while (i < line.size()) {
      if (line[i] != '(') {
        throw ParseError("expected '(' to open a pronunciation group", lineno,
                         static_cast<int>(i) + 1);
      }
      size_t comma = line.find(',', i + 1);
      if (comma == std::string::npos) {
        throw ParseError("unterminated pronunciation group", lineno,
                         static_cast<int>(i) + 1);
      }
      size_t close = line.find(')', comma + 1);
      if (close == std::string::npos) {
        throw ParseError("unterminated pronunciation group", lineno,
                         static_cast<int>(i) + 1);
      }
      PronVariant v;
      v.tag = line.substr(i + 1, comma - i - 1);
      v.pron = line.substr(comma + 1, close - comma - 1);
      if (v.tag.empty()) {
        throw ParseError("empty variant tag", lineno, static_cast<int>(i) + 2);
      }
      if (v.pron.empty()) {
        throw ParseError("empty pronunciation", lineno,
                         static_cast<int>(comma) + 2);
      }
      v.is_gen = ends_with(v.tag, "GEN");
      entry.variants.push_back(std::move(v));
      i = close + 1;
    }
    if (entry.variants.empty()) {
      throw ParseError("entry has no pronunciation groups", lineno,
                       static_cast<int>(tab) + 2);
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::string serialize_lexicon(const std::vector<LexiconEntry>& entries) {
  std::string out;
  for (const LexiconEntry& e : entries) {
    out += e.headword;
    out += '\t';
    for (const PronVariant& v : e.variants) {
      out += '(';
      out += v.tag;
      out += ',';
      out += v.pron;
      out += ')';
    }
    out += '\n';
  }
  return out;
}

std::vector<LexiconEntry> load_lexicon(const std::string& path) {
  return parse_lexicon(read_file(path));
}

PhonemeSeq ezafe_extend(const PhonemeSeq& base, const Alphabet& alphabet) {
  if (base.empty()) throw DataError("cannot apply ezafe to an empty pronunciation");
  if (alphabet.is_vowel(base.back())) return base + "ye";
  return base + "e";
}

std::vector<LexiconWarning> check_gen_consistency(
    const std::vector<LexiconEntry>& entries, const Alphabet& alphabet) {
  std::vector<LexiconWarning> warnings;
  for (const LexiconEntry& e : entries) {
    std::vector<const PronVariant*> bases;
    for (const PronVariant& v : e.variants) {
      if (!v.is_gen) bases.push_back(&v);
    }
    if (bases.empty()) continue;
    for (const PronVariant& v : e.variants) {
      if (!v.is_gen) continue;
      bool ok = false;
      for (const PronVariant* b : bases) {
        if (alphabet.valid_pron(b->pron) &&
            v.pron == ezafe_extend(b->pron, alphabet)) {
          ok = true;
          break;
        }
      }
      if (!ok) {
        warnings.push_back({e.headword, "GEN form " + v.pron +
                                            " does not extend any base form"});
      }
    }
  }
  return warnings;
}

std::string freq_key(const std::string& headword, const PhonemeSeq& pron) {
  return headword + "\t" + pron;
}

FreqTable parse_freq_table(const std::string& contents) {
  FreqTable freq;
  int lineno = 0;
  for (const std::string& line : split_lines(contents)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 3) {
      throw ParseError("frequency record needs word<TAB>pron<TAB>count", lineno, 1);
    }
    try {
      freq[freq_key(cols[0], cols[1])] += std::stoull(cols[2]);
    } catch (const std::exception&) {
      throw ParseError("bad count '" + cols[2] + "'", lineno,
                       static_cast<int>(cols[0].size() + cols[1].size()) + 3);
    }
  }
  return freq;
}

std::string serialize_freq_table(const FreqTable& freq) {
  std::vector<std::string> lines;
  lines.reserve(freq.size());
  for (const auto& [key, count] : freq) {
    lines.push_back(key + "\t" + std::to_string(count));
  }
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (auto& l : lines) out += l + "\n";
  return out;
}

std::unordered_set<std::string> parse_word_set(const std::string& contents) {
  std::unordered_set<std::string> words;
  for (const std::string& line : split_lines(contents)) {
    if (line.empty() || line[0] == '#') continue;
    words.insert(split(line, '\t')[0]);
  }
  return words;
}

Dicts build_dicts(const std::vector<LexiconEntry>& entries,
                  const FreqTable* freq,
                  const std::unordered_set<std::string>& exceptions) {
  // Merge variants per headword, preserving listing order.
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<PronVariant>> merged;
  for (const LexiconEntry& e : entries) {
    auto [it, inserted] = merged.try_emplace(e.headword);
    if (inserted) order.push_back(e.headword);
    it->second.insert(it->second.end(), e.variants.begin(), e.variants.end());
  }

  Dicts dicts;
  for (const std::string& word : order) {
    const auto& variants = merged[word];
    std::vector<PhonemeSeq> base_prons;
    bool has_gen = false;
    for (const PronVariant& v : variants) {
      if (v.is_gen) {
        has_gen = true;
      } else if (std::find(base_prons.begin(), base_prons.end(), v.pron) ==
                 base_prons.end()) {
        base_prons.push_back(v.pron);
      }
    }
    if (!has_gen) dicts.gen_skiplist.insert(word);

    if (base_prons.size() >= 2 && !exceptions.count(word)) {
      dicts.homograph_dict[word] = base_prons;
      continue;
    }
    PhonemeSeq chosen;
    if (base_prons.empty()) {
      chosen = variants.front().pron;  // GEN-only entry: inherently ezafe form
    } else if (base_prons.size() == 1 || freq == nullptr) {
      chosen = base_prons.front();
    } else {
      uint64_t best = 0;
      chosen = base_prons.front();
      for (const PhonemeSeq& p : base_prons) {
        auto it = freq->find(freq_key(word, p));
        uint64_t c = it == freq->end() ? 0 : it->second;
        if (c > best) {
          best = c;
          chosen = p;
        }
      }
    }
    dicts.pron_dict[word] = chosen;
  }
  return dicts;
}

std::vector<CorpusSample> parse_corpus(const std::string& contents) {
  std::vector<CorpusSample> corpus;
  int lineno = 0;
  for (const std::string& line : split_lines(contents)) {
    ++lineno;
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError("corpus line needs graphemes<TAB>phonemes", lineno, 1);
    }
    CorpusSample sample;
    for (const std::string& w : split(line.substr(0, tab), ' ')) {
      if (!w.empty()) sample.tokens.push_back(Token{utf8::decode(w), false});
    }
    for (const std::string& p : split(line.substr(tab + 1), ' ')) {
      if (!p.empty()) sample.prons.push_back(p);
    }
    if (sample.tokens.size() != sample.prons.size()) {
      throw ParseError("token/phoneme count mismatch (" +
                           std::to_string(sample.tokens.size()) + " vs " +
                           std::to_string(sample.prons.size()) + ")",
                       lineno, static_cast<int>(tab) + 2);
    }
    if (sample.tokens.empty()) {
      throw ParseError("empty corpus sentence", lineno, 1);
    }
    corpus.push_back(std::move(sample));
  }
  return corpus;
}

std::string serialize_corpus(const std::vector<CorpusSample>& corpus) {
  std::string out;
  for (const CorpusSample& s : corpus) {
    for (size_t i = 0; i < s.tokens.size(); ++i) {
      if (i) out += ' ';
      out += s.tokens[i].utf8();
    }
    out += '\t';
    for (size_t i = 0; i < s.prons.size(); ++i) {
      if (i) out += ' ';
      out += s.prons[i];
    }
    out += '\n';
  }
  return out;
}

std::vector<CorpusSample> load_corpus(const std::string& path) {
  return parse_corpus(read_file(path));
}

CorpusSplit split_corpus(const std::vector<CorpusSample>& corpus, uint64_t seed) {
  const size_t n = corpus.size();
  if (n < 20) {
    throw DataError("corpus too small to split: " + std::to_string(n) +
                    " sentences (need at least 20)");
  }
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(idx);
  const size_t n_train = n * 80 / 100;
  const size_t n_val = n * 5 / 100;
  CorpusSplit out;
  for (size_t i = 0; i < n; ++i) {
    const CorpusSample& s = corpus[idx[i]];
    if (i < n_train) {
      out.train.push_back(s);
    } else if (i < n_train + n_val) {
      out.validation.push_back(s);
    } else {
      out.test.push_back(s);
    }
  }
  return out;
}

namespace {

struct HeadwordProns {
  std::vector<PhonemeSeq> bases;
  std::vector<PhonemeSeq> gens;
};

}  // namespace

EzafeLabelReport derive_ezafe_labels(const std::vector<CorpusSample>& corpus,
                                     const std::vector<LexiconEntry>& entries,
                                     const Alphabet& alphabet) {
  std::unordered_map<std::string, HeadwordProns> lex;
  for (const LexiconEntry& e : entries) {
    HeadwordProns& hp = lex[e.headword];
    for (const PronVariant& v : e.variants) {
      auto& list = v.is_gen ? hp.gens : hp.bases;
      if (std::find(list.begin(), list.end(), v.pron) == list.end()) {
        list.push_back(v.pron);
      }
    }
  }

  // Attested pronunciations per grapheme, the fallback evidence for words the
  // lexicon does not list.
  std::unordered_map<std::string, std::vector<PhonemeSeq>> attested;
  for (const CorpusSample& s : corpus) {
    for (size_t i = 0; i < s.tokens.size(); ++i) {
      auto& list = attested[s.tokens[i].utf8()];
      if (std::find(list.begin(), list.end(), s.prons[i]) == list.end()) {
        list.push_back(s.prons[i]);
      }
    }
  }

  auto try_extend = [&](const PhonemeSeq& base, const PhonemeSeq& gold) {
    return alphabet.valid_pron(base) && !base.empty() &&
           ezafe_extend(base, alphabet) == gold;
  };

  EzafeLabelReport report;
  for (const CorpusSample& s : corpus) {
    auto windows = make_windows(s.tokens, /*include_punct=*/false);
    for (size_t i = 0; i < s.tokens.size(); ++i) {
      EzafeLabel rec;
      rec.window = windows[i];
      rec.gold_pron = s.prons[i];
      rec.label = 0;
      rec.base_pron = s.prons[i];
      const std::string word = s.tokens[i].utf8();
      const PhonemeSeq& gold = s.prons[i];

      auto lit = lex.find(word);
      if (lit != lex.end()) {
        const HeadwordProns& hp = lit->second;
        bool done = false;
        for (const PhonemeSeq& g : hp.gens) {
          if (g == gold) {
            rec.label = 1;
            done = true;
            // Recover the base by locating the extended source.
            for (const PhonemeSeq& b : hp.bases) {
              if (try_extend(b, gold)) {
                rec.base_pron = b;
                break;
              }
            }
            if (rec.label == 1 && rec.base_pron == gold) {
              // No listed base extends to it; strip by rule as a fallback.
              if (gold.size() >= 2 && gold.back() == 'e' &&
                  gold[gold.size() - 2] == 'y') {
                rec.base_pron = gold.substr(0, gold.size() - 2);
              } else if (!gold.empty() && gold.back() == 'e') {
                rec.base_pron = gold.substr(0, gold.size() - 1);
              }
            }
            break;
          }
        }
        if (!done) {
          for (const PhonemeSeq& b : hp.bases) {
            if (b == gold) {
              rec.label = 0;
              rec.base_pron = b;
              done = true;
              break;
            }
          }
        }
        if (!done) {
          for (const PhonemeSeq& b : hp.bases) {
            if (try_extend(b, gold)) {
              rec.label = 1;
              rec.base_pron = b;
              done = true;
              break;
            }
          }
        }
        if (!done) {
          rec.underivable = true;
          ++report.underivable_count;
        }
      } else {
        // Unlisted word: use corpus-internal evidence.
        const auto& seen = attested[word];
        bool done = false;
        for (const PhonemeSeq& other : seen) {
          if (other != gold && try_extend(other, gold)) {
            rec.label = 1;
            rec.base_pron = other;
            done = true;
            break;
          }
        }
        if (!done) {
          for (const PhonemeSeq& other : seen) {
            if (other != gold && try_extend(gold, other)) {
              rec.label = 0;  // gold is the base of an attested GEN form
              done = true;
              break;
            }
          }
        }
        if (!done) {
          rec.underivable = true;
          ++report.underivable_count;
        }
      }
      report.labels.push_back(std::move(rec));
    }
  }
  return report;
}

std::vector<OovWord> oov_test_subset(const std::vector<CorpusSample>& test,
                                     const std::vector<CorpusSample>& train) {
  std::unordered_set<std::string> train_vocab;
  for (const CorpusSample& s : train) {
    for (const Token& t : s.tokens) train_vocab.insert(t.utf8());
  }
  std::vector<OovWord> out;
  std::unordered_map<std::string, size_t> index;
  for (const CorpusSample& s : test) {
    for (size_t i = 0; i < s.tokens.size(); ++i) {
      const std::string w = s.tokens[i].utf8();
      if (train_vocab.count(w)) continue;
      auto it = index.find(w);
      if (it == index.end()) {
        index[w] = out.size();
        out.push_back({w, {s.prons[i]}});
      } else {
        auto& prons = out[it->second].gold_prons;
        if (std::find(prons.begin(), prons.end(), s.prons[i]) == prons.end()) {
          prons.push_back(s.prons[i]);
        }
      }
    }
  }
  return out;
}

FreqTable count_corpus_freq(const std::vector<CorpusSample>& corpus) {
  FreqTable freq;
  for (const CorpusSample& s : corpus) {
    for (size_t i = 0; i < s.tokens.size(); ++i) {
      ++freq[freq_key(s.tokens[i].utf8(), s.prons[i])];
    }
  }
  return freq;
}

}  // namespace g2p
