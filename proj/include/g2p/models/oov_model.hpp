#pragma once

#include <memory>
#include <string>
#include <vector>

#include "g2p/alphabet.hpp"
#include "g2p/models/seq2seq.hpp"

namespace g2p {
namespace models {

struct OovConfig {
  int d_model = 64;
  int heads = 4;
  int enc_layers = 2;
  int dec_layers = 2;
  int ffn = 128;
  double dropout = 0.1;
  int max_word_len = 32;
  int max_pron_len = 40;
};

struct OovPrediction {
  PhonemeSeq pron;
  double log_prob = 0.0;
  bool truncated = false;
};

struct TrainPair {
  std::u32string word;
  PhonemeSeq pron;
};

// Context-free grapheme-to-phoneme transformer for words outside the
// dictionary. The output vocabulary is the phoneme inventory plus BOS/EOS/PAD,
// so it can never emit an ezafe marker or any other special.
class OovModel {
 public:
  OovModel(const Alphabet& alphabet, const OovConfig& cfg, uint64_t seed);

  const Alphabet& alphabet() const { return alphabet_; }
  const OovConfig& config() const { return cfg_; }
  TransformerSeq2Seq& net() { return *net_; }
  const TransformerSeq2Seq& net() const { return *net_; }

  OovPrediction predict(const std::u32string& word, int beam = 1) const;
  double score(const std::u32string& word, const PhonemeSeq& pron) const;

  std::vector<int> word_ids(const std::u32string& word) const;
  std::vector<int> pron_ids(const PhonemeSeq& pron) const;
  PhonemeSeq ids_pron(const std::vector<int>& ids) const;

  void save(const std::string& path) const;
  static OovModel load(const std::string& path, const Alphabet& alphabet);

 private:
  Alphabet alphabet_;
  OovConfig cfg_;
  std::unique_ptr<TransformerSeq2Seq> net_;
};

struct OovTrainResult {
  std::unique_ptr<OovModel> model;
  std::vector<TrainLogEntry> log;
};

// Teacher-forced training over the pair multiset; duplicates are preserved so
// frequent words weigh more. Homographs may appear with several targets.
OovTrainResult train_oov(const std::vector<TrainPair>& pairs,
                         const Alphabet& alphabet, const OovConfig& cfg,
                         const TrainOptions& opts);

// TSV interchange: word TAB pronunciation per line.
std::vector<TrainPair> parse_train_pairs(const std::string& contents);
std::string serialize_train_pairs(const std::vector<TrainPair>& pairs);

}  // namespace models
}  // namespace g2p
