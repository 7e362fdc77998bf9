#include "g2p/pipeline.hpp"

#include <chrono>
#include <thread>

#include "g2p/io_util.hpp"
#include "g2p/utf8.hpp"

namespace g2p {

const char* route_name(Route r) {
  switch (r) {
    case Route::kDict:
      return "dict";
    case Route::kHomograph:
      return "homograph";
    case Route::kOov:
      return "oov";
    case Route::kPunct:
      return "punct";
  }
  return "?";
}

PhonemeSeq apply_ezafe(const PhonemeSeq& pron, int flag,
                       const Alphabet& alphabet) {
  if (flag == 0) return pron;
  if (pron.empty()) {
    throw DataError("cannot apply ezafe to an empty pronunciation");
  }
  return ezafe_extend(pron, alphabet);
}

void OovLog::record(const std::string& word, const PhonemeSeq& pron) {
  std::lock_guard<std::mutex> lock(mu_);
  auto [it, inserted] = entries_.try_emplace(word, pron, 0);
  if (inserted) order_.push_back(word);
  ++it->second.second;
}

std::vector<std::tuple<std::string, PhonemeSeq, uint64_t>> OovLog::snapshot()
    const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<std::tuple<std::string, PhonemeSeq, uint64_t>> out;
  out.reserve(order_.size());
  for (const std::string& w : order_) {
    const auto& [pron, count] = entries_.at(w);
    out.emplace_back(w, pron, count);
  }
  return out;
}

void OovLog::clear() {
  std::lock_guard<std::mutex> lock(mu_);
  order_.clear();
  entries_.clear();
}

int OovLog::flush(const std::string& path) {
  std::lock_guard<std::mutex> lock(mu_);
  // Merge with whatever is already on disk, accumulating counts.
  std::vector<std::string> merged_order;
  std::unordered_map<std::string, std::pair<PhonemeSeq, uint64_t>> merged;
  std::string existing;
  try {
    existing = read_file(path);
  } catch (const DataError&) {
    existing.clear();  // first flush
  }
  for (const std::string& line : split_lines(existing)) {
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 3) {
      throw DataError("malformed oov log line: " + line);
    }
    auto [it, inserted] =
        merged.try_emplace(cols[0], cols[1], std::stoull(cols[2]));
    if (inserted) merged_order.push_back(cols[0]);
  }
  for (const std::string& w : order_) {
    const auto& [pron, count] = entries_.at(w);
    auto [it, inserted] = merged.try_emplace(w, pron, 0);
    if (inserted) merged_order.push_back(w);
    it->second.second += count;
  }
  std::string out;
  for (const std::string& w : merged_order) {
    const auto& [pron, count] = merged.at(w);
    out += w + "\t" + pron + "\t" + std::to_string(count) + "\n";
  }
  write_file_atomic(path, out);
  const int flushed = static_cast<int>(order_.size());
  order_.clear();
  entries_.clear();
  return flushed;
}

G2pSystem::G2pSystem(Alphabet alphabet, NormTable norm, Dicts dicts,
                     std::optional<models::OovModel> oov,
                     std::optional<models::HomographModel> homograph,
                     std::optional<models::EzafeModelI> ezafe_i,
                     std::optional<models::EzafeModelII> ezafe_ii,
                     PipelineFlags flags)
    : alphabet_(std::move(alphabet)),
      norm_(std::move(norm)),
      dicts_(std::move(dicts)),
      oov_(std::move(oov)),
      homograph_(std::move(homograph)),
      ezafe_i_(std::move(ezafe_i)),
      ezafe_ii_(std::move(ezafe_ii)),
      flags_(flags) {
  // Routing must be a partition: homograph heads out of the pron dict.
  for (const auto& [word, prons] : dicts_.homograph_dict) {
    if (dicts_.pron_dict.count(word)) {
      throw DataError("homograph '" + word +
                      "' also appears in the pronunciation dictionary");
    }
  }
  if (flags_.ezafe_model == EzafeChoice::kModelI && !ezafe_i_ && ezafe_ii_) {
    flags_.ezafe_model = EzafeChoice::kModelII;
  }
}

std::unique_ptr<G2pSystem> G2pSystem::from_manifest(const Manifest& m) {
  Alphabet alphabet = Alphabet::load(m.get("alphabet"));
  NormTable norm;
  if (m.has("normalization")) norm = NormTable::load(m.get("normalization"));

  auto entries = load_lexicon(m.get("lexicon"));
  std::unordered_set<std::string> exceptions;
  if (m.has("exceptions")) {
    exceptions = parse_word_set(read_file(m.get("exceptions")));
  }
  FreqTable freq;
  const FreqTable* freq_ptr = nullptr;
  if (m.has("freq")) {
    freq = parse_freq_table(read_file(m.get("freq")));
    freq_ptr = &freq;
  }
  Dicts dicts = build_dicts(entries, freq_ptr, exceptions);

  PipelineFlags flags;
  flags.use_skiplist = m.get_bool("use_skiplist", true);
  const std::string choice = m.get_or("ezafe_model", "i");
  if (choice == "i") {
    flags.ezafe_model = EzafeChoice::kModelI;
  } else if (choice == "ii") {
    flags.ezafe_model = EzafeChoice::kModelII;
  } else {
    throw DataError("ezafe_model must be 'i' or 'ii', got '" + choice + "'");
  }
  flags.beam = static_cast<int>(m.get_int("beam", 1));
  flags.seed = static_cast<uint64_t>(m.get_int("seed", 7));
  flags.threads = static_cast<int>(m.get_int("threads", 1));

  std::optional<models::OovModel> oov;
  if (m.has("oov_checkpoint")) {
    oov = models::OovModel::load(m.get("oov_checkpoint"), alphabet);
  }
  std::optional<models::HomographModel> homograph;
  if (m.has("homograph_checkpoint")) {
    homograph =
        models::HomographModel::load(m.get("homograph_checkpoint"), alphabet);
  }
  std::optional<models::EzafeModelI> ezafe_i;
  if (m.has("ezafe_i_checkpoint")) {
    ezafe_i = models::EzafeModelI::load(m.get("ezafe_i_checkpoint"), alphabet);
  }
  std::optional<models::EzafeModelII> ezafe_ii;
  if (m.has("ezafe_ii_checkpoint")) {
    ezafe_ii =
        models::EzafeModelII::load(m.get("ezafe_ii_checkpoint"), alphabet);
  }
  if (flags.ezafe_model == EzafeChoice::kModelI && !ezafe_i && ezafe_ii) {
    flags.ezafe_model = EzafeChoice::kModelII;
  }
  return std::make_unique<G2pSystem>(
      std::move(alphabet), std::move(norm), std::move(dicts), std::move(oov),
      std::move(homograph), std::move(ezafe_i), std::move(ezafe_ii), flags);
}

G2pSystem::PronOutcome G2pSystem::resolve_pron(const Token& token,
                                               const Window5& window,
                                               size_t word_index) const {
  const std::string word = token.utf8();
  PronOutcome out{Route::kDict, {}, 0, 1, false};
  auto hg = dicts_.homograph_dict.find(word);
  if (hg != dicts_.homograph_dict.end()) {
    if (!homograph_) {
      throw DataError("homograph '" + word + "' but no homograph model loaded");
    }
    out.route = Route::kHomograph;
    // Per-word tie-break stream: reproducible regardless of execution order.
    Rng tie_rng(Rng::mix(flags_.seed, 0x74696562 + word_index));
    models::SnapMetadata meta;
    out.pron = homograph_->predict(window, hg->second, tie_rng, &meta);
    out.snap_distance = meta.distance;
    out.tie_count = meta.tie_count;
    return out;
  }
  auto it = dicts_.pron_dict.find(word);
  if (it != dicts_.pron_dict.end()) {
    out.route = Route::kDict;
    out.pron = it->second;
    return out;
  }
  if (!oov_) {
    throw DataError("word '" + word + "' is out of vocabulary but no oov "
                    "model is loaded");
  }
  out.route = Route::kOov;
  models::OovPrediction p = oov_->predict(token.text, flags_.beam);
  out.pron = p.pron;
  out.truncated = p.truncated;
  return out;
}

std::vector<int> G2pSystem::resolve_ezafe(const std::vector<Token>& words,
                                          const std::vector<Window5>& windows,
                                          std::vector<bool>* skiplist_hits)
    const {
  std::vector<int> flags(words.size(), 0);
  skiplist_hits->assign(words.size(), false);
  std::vector<size_t> model_indices;
  std::vector<Window5> model_windows;
  for (size_t i = 0; i < words.size(); ++i) {
    const std::string word = words[i].utf8();
    if (flags_.use_skiplist && dicts_.gen_skiplist.count(word)) {
      (*skiplist_hits)[i] = true;
      stats_.skiplist_skips.fetch_add(1, std::memory_order_relaxed);
      continue;
    }
    model_indices.push_back(i);
    model_windows.push_back(windows[i]);
  }
  if (!model_windows.empty()) {
    std::vector<models::EzafePrediction> preds;
    if (flags_.ezafe_model == EzafeChoice::kModelI) {
      if (!ezafe_i_) throw DataError("ezafe model I not loaded");
      preds = ezafe_i_->predict_batch(model_windows);
    } else {
      if (!ezafe_ii_) throw DataError("ezafe model II not loaded");
      preds = ezafe_ii_->predict_batch(model_windows);
    }
    stats_.ezafe_model_calls.fetch_add(model_windows.size(),
                                       std::memory_order_relaxed);
    for (size_t k = 0; k < model_indices.size(); ++k) {
      flags[model_indices[k]] = preds[k].label;
    }
  }
  return flags;
}

std::vector<WordResult> G2pSystem::convert(const std::string& raw) const {
  NormalizeResult norm = normalize_utf8(raw, alphabet_, norm_);
  std::vector<Token> tokens = tokenize(norm.text, alphabet_);
  std::vector<Token> words;
  for (const Token& t : tokens) {
    if (!t.is_punct) words.push_back(t);
  }
  std::vector<Window5> windows = make_windows(tokens, /*include_punct=*/false);

  using clock = std::chrono::steady_clock;

  // Pronunciation resolution and ezafe recognition are independent given the
  // windows; with threads > 1 they run concurrently and must produce exactly
  // what the sequential path produces.
  std::vector<PronOutcome> prons(words.size(),
                                 PronOutcome{Route::kDict, {}, 0, 1, false});
  std::vector<int> ezafe_flags;
  std::vector<bool> skiplist_hits;

  auto pron_work = [&]() {
    for (size_t i = 0; i < words.size(); ++i) {
      const auto t0 = clock::now();
      prons[i] = resolve_pron(words[i], windows[i], i);
      const auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                          clock::now() - t0)
                          .count();
      if (prons[i].route == Route::kDict) {
        stats_.dict_ns.fetch_add(ns, std::memory_order_relaxed);
      } else {
        stats_.model_ns.fetch_add(ns, std::memory_order_relaxed);
      }
    }
  };
  auto ezafe_work = [&]() {
    ezafe_flags = resolve_ezafe(words, windows, &skiplist_hits);
  };

  if (flags_.threads > 1 && !words.empty()) {
    std::thread t(pron_work);
    ezafe_work();
    t.join();
  } else {
    pron_work();
    ezafe_work();
  }

  // Stitch per-token results back together in input order.
  std::vector<WordResult> results;
  results.reserve(tokens.size());
  size_t wi = 0;
  for (const Token& t : tokens) {
    WordResult r;
    r.token = t;
    if (t.is_punct) {
      r.route = Route::kPunct;
      r.ezafe = 0;
      stats_.punct_tokens.fetch_add(1, std::memory_order_relaxed);
      results.push_back(std::move(r));
      continue;
    }
    const PronOutcome& p = prons[wi];
    r.route = p.route;
    r.pron_base = p.pron;
    // An empty pronunciation (possible from a weak model) cannot carry ezafe.
    r.ezafe = p.pron.empty() ? 0 : ezafe_flags[wi];
    r.pron = apply_ezafe(p.pron, r.ezafe, alphabet_);
    r.snap_distance = p.snap_distance;
    r.tie_count = p.tie_count;
    r.truncated = p.truncated;
    r.skiplist_hit = skiplist_hits[wi];
    switch (p.route) {
      case Route::kDict:
        stats_.dict_words.fetch_add(1, std::memory_order_relaxed);
        break;
      case Route::kHomograph:
        stats_.homograph_words.fetch_add(1, std::memory_order_relaxed);
        break;
      case Route::kOov:
        stats_.oov_words.fetch_add(1, std::memory_order_relaxed);
        oov_log_.record(t.utf8(), p.pron);
        break;
      case Route::kPunct:
        break;
    }
    results.push_back(std::move(r));
    ++wi;
  }
  return results;
}

}  // namespace g2p
