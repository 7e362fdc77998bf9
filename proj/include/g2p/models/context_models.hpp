#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "g2p/alphabet.hpp"
#include "g2p/models/seq2seq.hpp"
#include "g2p/nn/layers.hpp"
#include "g2p/text.hpp"

namespace g2p {
namespace models {

struct ContextConfig {
  int char_embed = 32;
  int word_hidden = 48;    // per direction, within-word GRUs
  int cross_hidden = 48;   // per direction, cross-word GRU
  int decoder_hidden = 64;
  int phoneme_embed = 32;
  int word_embed = 64;     // ezafe model II input embedding
  bool tied_word_encoders = true;
  bool decoder_attention = false;
  double dropout = 0.1;
  int max_word_len = 32;
  int max_pron_len = 40;

  nlohmann::json to_json() const;
  static ContextConfig from_json(const nlohmann::json& j);
};

// Per-batch encoding of Window5 inputs: character embeddings feed five
// within-word bidirectional GRUs (parameters shared across the five slots by
// default); each word representation is the concatenation of the final
// forward and backward states, with a learned null representation standing in
// for PAD slots; a cross-word bidirectional GRU over the five representations
// yields per-slot cross-word vectors.
class NGramEncoder {
 public:
  NGramEncoder(nn::ParamStore& ps, const Alphabet& alphabet,
               const ContextConfig& cfg, Rng& rng);

  struct Encoded {
    std::vector<nn::Var> word_reprs;    // 5 x (batch, 2*word_hidden)
    std::vector<nn::Var> cross_states;  // 5 x (batch, 2*cross_hidden)
    nn::Var cross_middle;               // alias of cross_states[2]
  };

  Encoded encode(nn::Graph& g, const std::vector<Window5>& windows) const;

  int word_repr_dim() const { return 2 * cfg_.word_hidden; }
  int cross_dim() const { return 2 * cfg_.cross_hidden; }

 private:
  const nn::BiGru& word_gru(int slot) const {
    return cfg_.tied_word_encoders ? word_grus_[0] : word_grus_[slot];
  }

  Alphabet alphabet_;  // own copy: models holding an encoder stay movable
  ContextConfig cfg_;
  nn::Embedding char_emb_;
  std::vector<nn::BiGru> word_grus_;  // 1 when tied, else 5
  nn::Param* null_repr_ = nullptr;
  nn::BiGru cross_gru_;
};

// A window paired with the gold pronunciation of its middle word (ezafe
// suffix removed; the ezafe heads own that phenomenon).
struct WindowSample {
  Window5 window;
  PhonemeSeq target;
};

// A window paired with the 0/1 ezafe label of its middle word.
struct LabeledWindow {
  Window5 window;
  int label = 0;
};

// TSV interchange: five token columns (PAD slots as the literal "<PAD>"),
// then the gold pronunciation or 0/1 label.
std::vector<WindowSample> parse_window_samples(const std::string& contents);
std::string serialize_window_samples(const std::vector<WindowSample>& samples);
std::vector<LabeledWindow> parse_labeled_windows(const std::string& contents);
std::string serialize_labeled_windows(const std::vector<LabeledWindow>& rows);

// Shared seq head: GRU decoder over the phoneme vocabulary driven by the
// concatenated middle-word and cross-word vectors, optionally attending over
// the five cross-word states.
class WindowToProns {
 public:
  WindowToProns(const Alphabet& alphabet, const ContextConfig& cfg,
                uint64_t seed);

  float train_batch(const std::vector<WindowSample>& batch, nn::Graph& g);
  DecodeResult greedy_decode(const Window5& window) const;
  PhonemeSeq ids_pron(const std::vector<int>& ids) const;

  const ContextConfig& config() const { return cfg_; }
  const Alphabet& alphabet() const { return alphabet_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

 private:
  nn::Var decode_step(nn::Graph& g, nn::Var h, nn::Var prev_emb,
                      const std::vector<nn::Var>& cross_states,
                      nn::Var* h_out) const;

  Alphabet alphabet_;
  ContextConfig cfg_;
  nn::ParamStore params_;
  std::unique_ptr<NGramEncoder> encoder_;
  nn::Embedding phoneme_emb_;
  nn::Linear init_h_;
  nn::Linear attn_query_;
  nn::GruCell decoder_;
  nn::Linear out_proj_;
};

struct SnapMetadata {
  PhonemeSeq raw_decode;
  int distance = 0;      // edit distance from raw decode to the result
  int tie_count = 1;     // number of equally-near candidates
  int tie_index = 0;     // which of them the seeded draw picked
  bool snapped = false;  // false when the raw decode was already allowed
};

// Returns the member of `allowed` nearest to `decoded` by edit distance
// (the decoded sequence itself when it is allowed). Ties are broken by a
// seeded uniform draw. `allowed` must be non-empty.
PhonemeSeq snap_to_allowed(const PhonemeSeq& decoded,
                           const std::vector<PhonemeSeq>& allowed, Rng& rng,
                           SnapMetadata* metadata = nullptr);

struct HomographTrainResult;

// Homograph disambiguation model: decodes the middle word's pronunciation
// and snaps it onto the word's allowed pronunciation set.
class HomographModel {
 public:
  HomographModel(const Alphabet& alphabet, const ContextConfig& cfg,
                 uint64_t seed);

  PhonemeSeq predict(const Window5& window,
                     const std::vector<PhonemeSeq>& allowed, Rng& tie_rng,
                     SnapMetadata* metadata = nullptr) const;
  // Raw decode without snapping (evaluation/diagnostics).
  PhonemeSeq predict_raw(const Window5& window) const;

  WindowToProns& net() { return *net_; }
  const WindowToProns& net() const { return *net_; }

  void save(const std::string& path) const;
  static HomographModel load(const std::string& path, const Alphabet& alphabet);

 private:
  std::unique_ptr<WindowToProns> net_;
};

struct HomographTrainResult {
  std::unique_ptr<HomographModel> model;
  std::vector<TrainLogEntry> log;
};

// Teacher-forced training over window samples; middles need not be
// homographs (non-homograph middles are legal and useful).
HomographTrainResult train_homograph(const std::vector<WindowSample>& samples,
                                     const Alphabet& alphabet,
                                     const ContextConfig& cfg,
                                     const TrainOptions& opts);

struct EzafePrediction {
  int label = 0;
  double prob_ezafe = 0.0;  // probability of label 1; pair sums to 1
};

// Character-level ezafe classifier: linear head on the middle cross-word
// vector.
class EzafeModelI {
 public:
  EzafeModelI(const Alphabet& alphabet, const ContextConfig& cfg, uint64_t seed);

  float train_batch(const std::vector<LabeledWindow>& batch, nn::Graph& g);
  EzafePrediction predict(const Window5& window) const;
  std::vector<EzafePrediction> predict_batch(
      const std::vector<Window5>& windows) const;

  const ContextConfig& config() const { return cfg_; }
  nn::ParamStore& params() { return params_; }

  void save(const std::string& path) const;
  static EzafeModelI load(const std::string& path, const Alphabet& alphabet);

 private:
  Alphabet alphabet_;
  ContextConfig cfg_;
  nn::ParamStore params_;
  std::unique_ptr<NGramEncoder> encoder_;
  nn::Linear head_;
};

// Word-level ezafe classifier: whole-word embeddings over a training-time
// vocabulary (unknown words fall to the UNK row), bidirectional GRU over the
// five token embeddings, linear head on the middle state.
class EzafeModelII {
 public:
  EzafeModelII(const Alphabet& alphabet, std::vector<std::string> vocab,
               const ContextConfig& cfg, uint64_t seed);

  float train_batch(const std::vector<LabeledWindow>& batch, nn::Graph& g);
  EzafePrediction predict(const Window5& window) const;
  std::vector<EzafePrediction> predict_batch(
      const std::vector<Window5>& windows) const;

  int word_id(const std::u32string& word, bool is_pad) const;
  const std::vector<std::string>& vocab() const { return vocab_; }
  const ContextConfig& config() const { return cfg_; }
  nn::ParamStore& params() { return params_; }

  void save(const std::string& path) const;
  static EzafeModelII load(const std::string& path, const Alphabet& alphabet);

 private:
  Alphabet alphabet_;
  ContextConfig cfg_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, int> vocab_ids_;
  nn::ParamStore params_;
  nn::Embedding word_emb_;
  nn::BiGru gru_;
  nn::Linear head_;
};

struct EzafeTrainResultI {
  std::unique_ptr<EzafeModelI> model;
  std::vector<TrainLogEntry> log;
  bool single_class = false;  // degenerate training set warning
};

struct EzafeTrainResultII {
  std::unique_ptr<EzafeModelII> model;
  std::vector<TrainLogEntry> log;
  bool single_class = false;
};

EzafeTrainResultI train_ezafe_i(const std::vector<LabeledWindow>& rows,
                                const Alphabet& alphabet,
                                const ContextConfig& cfg,
                                const TrainOptions& opts);
EzafeTrainResultII train_ezafe_ii(const std::vector<LabeledWindow>& rows,
                                  const Alphabet& alphabet,
                                  const ContextConfig& cfg,
                                  const TrainOptions& opts);

}  // namespace models
}  // namespace g2p
