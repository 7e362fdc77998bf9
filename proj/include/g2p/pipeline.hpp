#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "g2p/lexicon.hpp"
#include "g2p/manifest.hpp"
#include "g2p/models/context_models.hpp"
#include "g2p/models/oov_model.hpp"
#include "g2p/text.hpp"

namespace g2p {

enum class Route { kDict, kHomograph, kOov, kPunct };
const char* route_name(Route r);

struct WordResult {
  Token token;
  Route route = Route::kDict;
  PhonemeSeq pron_base;  // before any ezafe suffix
  int ezafe = 0;
  PhonemeSeq pron;       // final output, ezafe applied
  // Diagnostics.
  int snap_distance = 0;
  int tie_count = 1;
  bool truncated = false;
  bool skiplist_hit = false;
};

// flag = 0 leaves the pronunciation unchanged; flag = 1 appends "e" after a
// consonant and "ye" after a vowel. An empty pronunciation cannot take ezafe.
PhonemeSeq apply_ezafe(const PhonemeSeq& pron, int flag,
                       const Alphabet& alphabet);

enum class EzafeChoice { kModelI, kModelII };

struct PipelineFlags {
  bool use_skiplist = true;
  EzafeChoice ezafe_model = EzafeChoice::kModelI;
  int beam = 1;
  uint64_t seed = 7;
  int threads = 1;  // >1 runs pronunciation and ezafe resolution concurrently
};

// Accumulates out-of-vocabulary sightings; one record per distinct word with
// the predicted pronunciation and a count. Thread-safe appends.
class OovLog {
 public:
  void record(const std::string& word, const PhonemeSeq& pron);
  // Merges with any existing records at `path` and rewrites it atomically.
  int flush(const std::string& path);
  std::vector<std::tuple<std::string, PhonemeSeq, uint64_t>> snapshot() const;
  void clear();

 private:
  mutable std::mutex mu_;
  std::vector<std::string> order_;
  std::unordered_map<std::string, std::pair<PhonemeSeq, uint64_t>> entries_;
};

struct ConvertStats {
  std::atomic<uint64_t> dict_words{0};
  std::atomic<uint64_t> homograph_words{0};
  std::atomic<uint64_t> oov_words{0};
  std::atomic<uint64_t> punct_tokens{0};
  std::atomic<uint64_t> ezafe_model_calls{0};
  std::atomic<uint64_t> skiplist_skips{0};
  std::atomic<uint64_t> dict_ns{0};   // time spent resolving dictionary words
  std::atomic<uint64_t> model_ns{0};  // time spent in neural routes
};

// The assembled converter: dictionary first (homograph check precedes the
// dictionary so homographs stay reachable), neural fallbacks for the rest,
// ezafe recognition over every word.
class G2pSystem {
 public:
  G2pSystem(Alphabet alphabet, NormTable norm, Dicts dicts,
            std::optional<models::OovModel> oov,
            std::optional<models::HomographModel> homograph,
            std::optional<models::EzafeModelI> ezafe_i,
            std::optional<models::EzafeModelII> ezafe_ii, PipelineFlags flags);

  // Loads every component named by the manifest; any unloadable model fails
  // here, never mid-conversion.
  static std::unique_ptr<G2pSystem> from_manifest(const Manifest& m);

  std::vector<WordResult> convert(const std::string& raw) const;

  const Alphabet& alphabet() const { return alphabet_; }
  const Dicts& dicts() const { return dicts_; }
  const PipelineFlags& flags() const { return flags_; }
  PipelineFlags& flags() { return flags_; }
  OovLog& oov_log() const { return oov_log_; }
  const ConvertStats& stats() const { return stats_; }

 private:
  struct PronOutcome {
    Route route;
    PhonemeSeq pron;
    int snap_distance = 0;
    int tie_count = 1;
    bool truncated = false;
  };
  PronOutcome resolve_pron(const Token& token, const Window5& window,
                           size_t word_index) const;
  std::vector<int> resolve_ezafe(const std::vector<Token>& words,
                                 const std::vector<Window5>& windows,
                                 std::vector<bool>* skiplist_hits) const;

  Alphabet alphabet_;
  NormTable norm_;
  Dicts dicts_;
  std::optional<models::OovModel> oov_;
  std::optional<models::HomographModel> homograph_;
  std::optional<models::EzafeModelI> ezafe_i_;
  std::optional<models::EzafeModelII> ezafe_ii_;
  PipelineFlags flags_;
  mutable OovLog oov_log_;
  mutable ConvertStats stats_;
};

}  // namespace g2p
