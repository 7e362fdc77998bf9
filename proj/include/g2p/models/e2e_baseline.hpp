#pragma once

#include <memory>
#include <string>
#include <vector>

#include "g2p/alphabet.hpp"
#include "g2p/models/context_models.hpp"
#include "g2p/models/seq2seq.hpp"
#include "g2p/text.hpp"

namespace g2p {
namespace models {

// Character rendering of a window for the end-to-end transformer: the five
// words concatenated, '#' between the outer word pairs, the middle word in
// parentheses ("w1#w2(w3)w4#w5"). PAD slots render as empty segments. With
// border_all, '#' separates every adjacent pair instead.
std::u32string format_bordered(const Window5& window, bool border_all = false);

// Inverse of format_bordered; tolerates a '#' directly adjacent to either
// parenthesis, so both border layouts parse.
Window5 parse_bordered(const std::u32string& text);

struct E2eConfig {
  int d_model = 64;
  int heads = 4;
  int enc_layers = 2;
  int dec_layers = 2;
  int ffn = 128;
  double dropout = 0.1;
  int max_word_len = 32;
  int max_pron_len = 40;
  bool border_all = false;

  int max_src() const { return 5 * max_word_len + 4; }

  nlohmann::json to_json() const;
  static E2eConfig from_json(const nlohmann::json& j);
};

struct E2ePrediction {
  PhonemeSeq pron;  // includes the ezafe suffix when the model emits one
  double log_prob = 0.0;
  bool truncated = false;
};

// End-to-end baseline (a): character-level transformer over the bordered
// window, emitting the middle word's pronunciation with ezafe realized.
class E2eTransformer {
 public:
  E2eTransformer(const Alphabet& alphabet, const E2eConfig& cfg, uint64_t seed);

  float train_batch(const std::vector<WindowSample>& batch, nn::Graph& g);
  E2ePrediction predict(const Window5& window, int beam = 1) const;

  std::vector<int> window_ids(const Window5& window) const;
  std::vector<int> pron_ids(const PhonemeSeq& pron) const;

  const E2eConfig& config() const { return cfg_; }
  nn::ParamStore& params() { return net_->params(); }
  TransformerSeq2Seq& net() { return *net_; }

  void save(const std::string& path) const;
  static E2eTransformer load(const std::string& path, const Alphabet& alphabet);

 private:
  Alphabet alphabet_;
  E2eConfig cfg_;
  std::unique_ptr<TransformerSeq2Seq> net_;
  int border_id_ = 0;
  int open_id_ = 0;
  int close_id_ = 0;
};

// End-to-end baseline (b): the cross-word GRU encoder with an attention
// decoder, trained on the same ezafe-realized targets.
class E2eGru {
 public:
  E2eGru(const Alphabet& alphabet, ContextConfig cfg, uint64_t seed);

  float train_batch(const std::vector<WindowSample>& batch, nn::Graph& g) {
    return net_->train_batch(batch, g);
  }
  E2ePrediction predict(const Window5& window) const;

  nn::ParamStore& params() { return net_->params(); }
  WindowToProns& net() { return *net_; }

  void save(const std::string& path) const;
  static E2eGru load(const std::string& path, const Alphabet& alphabet);

 private:
  std::unique_ptr<WindowToProns> net_;
};

enum class E2eArch { kTransformer, kGruAttention };

struct E2eTrainResult {
  std::unique_ptr<E2eTransformer> transformer;  // set for kTransformer
  std::unique_ptr<E2eGru> gru;                  // set for kGruAttention
  std::vector<TrainLogEntry> log;

  E2ePrediction predict(const Window5& window) const {
    return transformer ? transformer->predict(window) : gru->predict(window);
  }
};

// Gold targets must carry the ezafe suffix where the corpus realizes one.
E2eTrainResult train_e2e(const std::vector<WindowSample>& samples,
                         const Alphabet& alphabet, E2eArch arch,
                         const E2eConfig& e2e_cfg, const ContextConfig& gru_cfg,
                         const TrainOptions& opts);

}  // namespace models
}  // namespace g2p
