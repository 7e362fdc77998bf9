#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "g2p/nn/layers.hpp"
#include "g2p/nn/optim.hpp"

namespace g2p {
namespace models {

// One (source ids, target ids) training pair, without BOS/EOS; the model adds
// them around the target itself.
struct IdPair {
  std::vector<int> src;
  std::vector<int> tgt;
};

struct Seq2SeqConfig {
  int src_vocab = 0;
  int tgt_vocab = 0;
  int d_model = 64;
  int heads = 4;
  int enc_layers = 2;
  int dec_layers = 2;
  int ffn = 128;
  double dropout = 0.1;
  int max_src = 32;
  int max_tgt = 40;

  nlohmann::json to_json() const;
  static Seq2SeqConfig from_json(const nlohmann::json& j);
};

struct DecodeResult {
  std::vector<int> ids;     // target ids without BOS/EOS
  double log_prob = 0.0;    // model score of the returned sequence
  bool truncated = false;   // hit max_tgt before emitting EOS
};

// Character-level encoder-decoder transformer with sinusoidal positions at
// the model input. Shared by the out-of-vocabulary model and the end-to-end
// baseline; reserved ids follow Alphabet (PAD=0, BOS=1, EOS=2).
class TransformerSeq2Seq {
 public:
  TransformerSeq2Seq(Seq2SeqConfig cfg, uint64_t seed);

  // Teacher-forced mean cross-entropy over one padded batch; accumulates
  // gradients into the store.
  float train_batch(const std::vector<IdPair>& batch, nn::Graph& g);

  // Evaluation loss, no gradients.
  float eval_loss(const std::vector<IdPair>& batch);

  DecodeResult greedy_decode(const std::vector<int>& src) const;
  // Iteratively widened beam search: returns the best completed hypothesis
  // found over widths 1..beam, so widening never yields a worse score.
  DecodeResult beam_decode(const std::vector<int>& src, int beam) const;

  // Log-probability of a full target sequence given the source.
  double score(const std::vector<int>& src, const std::vector<int>& tgt) const;

  const Seq2SeqConfig& config() const { return cfg_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

 private:
  // Encodes a batch of sources padded to src_max; returns packed memory
  // (batch*src_max, d_model) and per-sample lengths.
  nn::Var encode(nn::Graph& g, const std::vector<std::vector<int>>& srcs,
                 int src_max, const std::vector<int>& src_lens) const;
  nn::Var decode_logits(nn::Graph& g, nn::Var memory,
                        const std::vector<int>& src_lens, int src_max,
                        const std::vector<std::vector<int>>& tgt_in,
                        int tgt_max, const std::vector<int>& tgt_lens) const;

  Seq2SeqConfig cfg_;
  nn::ParamStore params_;
  nn::Embedding src_emb_;
  nn::Embedding tgt_emb_;
  std::vector<nn::TransformerBlock> enc_;
  std::vector<nn::TransformerBlock> dec_;
  nn::Linear out_proj_;
  nn::Tensor pos_;  // precomputed sinusoid table
};

// Generic training-loop driver shared by seq2seq models.
struct TrainLogEntry {
  int epoch = 0;
  float train_loss = 0.0f;
  float val_loss = 0.0f;
};

struct TrainOptions {
  int epochs = 10;
  int batch_size = 32;
  double lr = 1e-3;
  bool lr_halving = true;  // halve the rate at 50% and again at 75% of epochs
  uint64_t seed = 1;
  bool verbose = false;
};

// Stepwise schedule shared by the training loops.
double scheduled_lr(const TrainOptions& opts, int epoch);

std::vector<TrainLogEntry> train_seq2seq(TransformerSeq2Seq& model,
                                         std::vector<IdPair> train,
                                         const std::vector<IdPair>& val,
                                         const TrainOptions& opts);

}  // namespace models
}  // namespace g2p
