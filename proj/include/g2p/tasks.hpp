#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "g2p/manifest.hpp"
#include "g2p/metrics.hpp"
#include "g2p/models/e2e_baseline.hpp"
#include "g2p/pipeline.hpp"
#include "g2p/synthlang.hpp"

namespace g2p {
namespace tasks {

// Everything the training and evaluation commands need, loaded once:
// alphabet, lexicon, the seeded corpus split, dictionaries built with
// train-corpus frequencies, and per-word ezafe labels (which also carry the
// ezafe-stripped base pronunciations used as decoder targets).
struct DataBundle {
  Alphabet alphabet;
  NormTable norm;
  std::vector<LexiconEntry> lexicon;
  CorpusSplit split;
  Dicts dicts;
  EzafeLabelReport train_labels;
  EzafeLabelReport test_labels;
};

DataBundle load_data(const Manifest& m);

models::OovConfig oov_config(const Manifest& m);
models::ContextConfig context_config(const Manifest& m);
models::E2eConfig e2e_config(const Manifest& m);
models::TrainOptions train_options(const Manifest& m, const std::string& module);

// Dataset assembly. Caps are applied with a seeded subsample; cap <= 0 keeps
// everything.
std::vector<models::TrainPair> oov_pairs(const EzafeLabelReport& labels,
                                         int dup_cap);
std::vector<models::WindowSample> homograph_samples(
    const EzafeLabelReport& labels, const HomographDict& homographs,
    double nonhomograph_ratio, int cap, uint64_t seed);
std::vector<models::LabeledWindow> ezafe_rows(const EzafeLabelReport& labels,
                                              int cap, uint64_t seed);
std::vector<models::WindowSample> e2e_samples(const EzafeLabelReport& labels,
                                              int cap, uint64_t seed);

// Trains one module named oov | homograph | ezafe-i | ezafe-ii |
// e2e-transformer | e2e-gru, writes its checkpoint and a training-curve TSV
// next to it, and returns the checkpoint path.
std::string train_module(const std::string& module, const Manifest& m);
std::string checkpoint_path(const Manifest& m, const std::string& module);

struct EvalResult {
  metrics::WordAccuracy word_acc;
  metrics::EzafeAccuracy ezafe_acc;
  metrics::HomographEvalReport homograph;
  int64_t oov_words = 0;
  int64_t truncated = 0;
  std::string words_tsv;     // sid, widx, route, gold, hyp, gold_ez, hyp_ez
  nlohmann::json summary() const;
  std::string report_jsonl() const;
};

// Runs the full pipeline over a test corpus and scores it against the gold
// transcriptions; homograph occurrences are additionally scored with the
// balanced per-pronunciation metric.
EvalResult evaluate_system(G2pSystem& system,
                           const std::vector<CorpusSample>& test,
                           const EzafeLabelReport& test_labels,
                           const HomographDict& homographs);

// Word accuracy of an end-to-end baseline over the same per-word records.
metrics::WordAccuracy evaluate_e2e(
    const std::function<PhonemeSeq(const Window5&)>& predict,
    const EzafeLabelReport& test_labels);

}  // namespace tasks
}  // namespace g2p
