#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "g2p/alphabet.hpp"

namespace g2p {
namespace metrics {

struct WordAccuracy {
  int64_t correct = 0;
  int64_t total = 0;
  double fraction() const { return total == 0 ? 0.0 : double(correct) / total; }
};

WordAccuracy word_accuracy(const std::vector<PhonemeSeq>& hyp,
                           const std::vector<PhonemeSeq>& ref);

struct EzafeAccuracy {
  int64_t correct = 0;
  int64_t total = 0;
  // Confusion counts for imbalance diagnostics; ezafe (label 1) is positive.
  int64_t true_positive = 0;
  int64_t false_positive = 0;
  int64_t true_negative = 0;
  int64_t false_negative = 0;
  double fraction() const { return total == 0 ? 0.0 : double(correct) / total; }
};

EzafeAccuracy ezafe_accuracy(const std::vector<int>& hyp,
                             const std::vector<int>& ref);

// One evaluated homograph occurrence.
struct HomographSample {
  std::string homograph;
  PhonemeSeq gold;
  PhonemeSeq hyp;
};

struct PronTally {
  PhonemeSeq pron;
  int64_t appearances = 0;   // gold occurrences in the sample set
  int64_t correct_calls = 0; // hyp == gold == this pron
};

struct HomographEntry {
  std::string homograph;
  std::vector<PronTally> prons;     // full inventory, zero rows included
  int n_effective = 0;              // prons with appearances > 0
  int zero_appearance_prons = 0;    // inventory prons absent from the set
  double s_score = 0.0;             // per-homograph balanced score
};

struct HomographEvalReport {
  std::vector<HomographEntry> entries;  // homographs present in the samples
  int unique_homographs = 0;            // C
  double score = 0.0;                   // mean of the per-homograph scores
  WordAccuracy accuracy;                // plain accuracy over the samples

  nlohmann::json to_jsonl() const;      // one record per homograph + summary
  std::string to_jsonl_string() const;
};

// Balanced per-pronunciation score: for each homograph, average the
// correct/appearance ratio over its pronunciations observed in the sample
// set (zero-appearance pronunciations are excluded from both the sum and the
// divisor), then average across homographs. A hypothesis outside the
// inventory counts as incorrect for every pronunciation.
HomographEvalReport homograph_score(
    const std::vector<HomographSample>& samples,
    const std::unordered_map<std::string, std::vector<PhonemeSeq>>& inventory);

// Optional extra, not part of the primary evaluation: per-symbol edit
// distance over reference length.
double phoneme_error_rate(const std::vector<PhonemeSeq>& hyp,
                          const std::vector<PhonemeSeq>& ref);

}  // namespace metrics
}  // namespace g2p
