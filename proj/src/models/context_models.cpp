#include "g2p/models/context_models.hpp"

#include <algorithm>
#include <map>

#include "g2p/edit_distance.hpp"
#include "g2p/io_util.hpp"
#include "g2p/nn/checkpoint.hpp"
#include "g2p/nn/optim.hpp"
#include "g2p/utf8.hpp"

namespace g2p {
namespace models {

using nn::Graph;
using nn::Tensor;
using nn::Var;

nlohmann::json ContextConfig::to_json() const {
  return {{"char_embed", char_embed},
          {"word_hidden", word_hidden},
          {"cross_hidden", cross_hidden},
          {"decoder_hidden", decoder_hidden},
          {"phoneme_embed", phoneme_embed},
          {"word_embed", word_embed},
          {"tied_word_encoders", tied_word_encoders},
          {"decoder_attention", decoder_attention},
          {"dropout", dropout},
          {"max_word_len", max_word_len},
          {"max_pron_len", max_pron_len}};
}

ContextConfig ContextConfig::from_json(const nlohmann::json& j) {
  ContextConfig c;
  c.char_embed = j.at("char_embed");
  c.word_hidden = j.at("word_hidden");
  c.cross_hidden = j.at("cross_hidden");
  c.decoder_hidden = j.at("decoder_hidden");
  c.phoneme_embed = j.at("phoneme_embed");
  c.word_embed = j.at("word_embed");
  c.tied_word_encoders = j.at("tied_word_encoders");
  c.decoder_attention = j.at("decoder_attention");
  c.dropout = j.at("dropout");
  c.max_word_len = j.at("max_word_len");
  c.max_pron_len = j.at("max_pron_len");
  return c;
}

// ------------------------------------------------------------- NGramEncoder

NGramEncoder::NGramEncoder(nn::ParamStore& ps, const Alphabet& alphabet,
                           const ContextConfig& cfg, Rng& rng)
    : alphabet_(alphabet), cfg_(cfg) {
  Rng r0 = rng.child(0);
  char_emb_ = nn::Embedding(ps, "encoder.char_emb",
                            alphabet_.grapheme_vocab_size(), cfg.char_embed, r0);
  const int n_grus = cfg.tied_word_encoders ? 1 : 5;
  for (int i = 0; i < n_grus; ++i) {
    Rng r = rng.child(1 + i);
    word_grus_.emplace_back(ps, "encoder.word_gru" + std::to_string(i),
                            cfg.char_embed, cfg.word_hidden, r);
  }
  Rng r2 = rng.child(6);
  null_repr_ = ps.create("encoder.null_repr", {1, 2 * cfg.word_hidden},
                         2 * cfg.word_hidden, r2);
  Rng r3 = rng.child(7);
  cross_gru_ = nn::BiGru(ps, "encoder.cross_gru", 2 * cfg.word_hidden,
                         cfg.cross_hidden, r3);
}

NGramEncoder::Encoded NGramEncoder::encode(
    Graph& g, const std::vector<Window5>& windows) const {
  if (windows.empty()) throw DataError("encode: empty window batch");
  const int batch = static_cast<int>(windows.size());
  for (const Window5& w : windows) {
    if (w.pad_mask[Window5::kTarget]) {
      throw DataError("window target slot is a PAD sentinel");
    }
  }

  Encoded out;
  for (int slot = 0; slot < 5; ++slot) {
    // Character ids per sample, truncated to the configured maximum.
    std::vector<std::vector<int>> char_ids(batch);
    int max_len = 1;
    for (int s = 0; s < batch; ++s) {
      if (!windows[s].pad_mask[slot]) {
        const std::u32string& word = windows[s].words[slot];
        const size_t n =
            std::min(word.size(), static_cast<size_t>(cfg_.max_word_len));
        for (size_t k = 0; k < n; ++k) {
          char_ids[s].push_back(alphabet_.grapheme_id(word[k]));
        }
        max_len = std::max(max_len, static_cast<int>(n));
      }
    }
    std::vector<Var> steps, masks;
    steps.reserve(max_len);
    masks.reserve(max_len);
    for (int t = 0; t < max_len; ++t) {
      std::vector<int> ids(batch, Alphabet::kPadId);
      Tensor m = Tensor::zeros({batch, 1});
      for (int s = 0; s < batch; ++s) {
        if (t < static_cast<int>(char_ids[s].size())) {
          ids[s] = char_ids[s][t];
          m.data[s] = 1.0f;
        }
      }
      steps.push_back(char_emb_(g, ids));
      masks.push_back(g.input(std::move(m)));
    }
    nn::BiGruOut gru = word_gru(slot).run(g, steps, &masks);
    Var repr = g.concat_cols({gru.final_forward, gru.final_backward});

    // PAD slots take the learned null representation instead.
    Tensor pad_flags = Tensor::zeros({batch, 1});
    bool any_pad = false;
    for (int s = 0; s < batch; ++s) {
      if (windows[s].pad_mask[slot]) {
        pad_flags.data[s] = 1.0f;
        any_pad = true;
      }
    }
    if (any_pad) {
      Var flags = g.input(std::move(pad_flags));
      Var keep = g.mul_colvec(repr, g.affine(flags, -1.0f, 1.0f));
      Var null_part = g.matmul(flags, g.param(null_repr_));
      repr = g.add(keep, null_part);
    }
    repr = g.dropout(repr, cfg_.dropout);
    out.word_reprs.push_back(repr);
  }

  nn::BiGruOut cross = cross_gru_.run(g, out.word_reprs, nullptr);
  out.cross_states = cross.states;
  out.cross_middle = cross.states[Window5::kTarget];
  return out;
}

// ------------------------------------------------------------- windows TSV

namespace {

const std::string kPadLiteral = Alphabet::kPadText;

Window5 window_from_cols(const std::vector<std::string>& cols, int lineno) {
  Window5 w;
  for (int k = 0; k < 5; ++k) {
    if (cols[k].empty()) {
      throw ParseError("empty token column", lineno, k + 1);
    }
    if (cols[k] == kPadLiteral) {
      w.words[k] = utf8::decode(kPadLiteral);
      w.pad_mask[k] = true;
    } else {
      w.words[k] = utf8::decode(cols[k]);
      w.pad_mask[k] = false;
    }
  }
  if (w.pad_mask[Window5::kTarget]) {
    throw ParseError("middle token must not be the PAD sentinel", lineno, 3);
  }
  return w;
}

std::string window_to_tsv(const Window5& w) {
  std::string out;
  for (int k = 0; k < 5; ++k) {
    if (k) out += '\t';
    out += w.pad_mask[k] ? kPadLiteral : utf8::encode(w.words[k]);
  }
  return out;
}

}  // namespace

std::vector<WindowSample> parse_window_samples(const std::string& contents) {
  std::vector<WindowSample> rows;
  int lineno = 0;
  for (const std::string& line : split_lines(contents)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 6) {
      throw ParseError("window sample needs 5 token columns and a gold column",
                       lineno, 1);
    }
    rows.push_back({window_from_cols(cols, lineno), cols[5]});
  }
  return rows;
}

std::string serialize_window_samples(const std::vector<WindowSample>& samples) {
  std::string out;
  for (const WindowSample& s : samples) {
    out += window_to_tsv(s.window) + "\t" + s.target + "\n";
  }
  return out;
}

std::vector<LabeledWindow> parse_labeled_windows(const std::string& contents) {
  std::vector<LabeledWindow> rows;
  int lineno = 0;
  for (const std::string& line : split_lines(contents)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 6) {
      throw ParseError("labeled window needs 5 token columns and a 0/1 column",
                       lineno, 1);
    }
    if (cols[5] != "0" && cols[5] != "1") {
      throw ParseError("label must be 0 or 1, got '" + cols[5] + "'", lineno, 6);
    }
    rows.push_back({window_from_cols(cols, lineno), cols[5] == "1" ? 1 : 0});
  }
  return rows;
}

std::string serialize_labeled_windows(const std::vector<LabeledWindow>& rows) {
  std::string out;
  for (const LabeledWindow& r : rows) {
    out += window_to_tsv(r.window) + "\t" + std::to_string(r.label) + "\n";
  }
  return out;
}

// ------------------------------------------------------------ WindowToProns

WindowToProns::WindowToProns(const Alphabet& alphabet,
                             const ContextConfig& cfg, uint64_t seed)
    : alphabet_(alphabet), cfg_(cfg) {
  Rng rng(seed);
  Rng enc_rng = rng.child(100);
  encoder_ = std::make_unique<NGramEncoder>(params_, alphabet_, cfg_, enc_rng);
  Rng r0 = rng.child(101);
  phoneme_emb_ = nn::Embedding(params_, "decoder.phoneme_emb",
                               alphabet_.phoneme_vocab_size(),
                               cfg_.phoneme_embed, r0);
  const int enc_dim = encoder_->word_repr_dim() + encoder_->cross_dim();
  Rng r1 = rng.child(102);
  init_h_ = nn::Linear(params_, "decoder.init_h", enc_dim, cfg_.decoder_hidden,
                       r1);
  int in_dim = cfg_.phoneme_embed;
  if (cfg_.decoder_attention) {
    Rng r2 = rng.child(103);
    attn_query_ = nn::Linear(params_, "decoder.attn_query", cfg_.decoder_hidden,
                             encoder_->cross_dim(), r2);
    in_dim += encoder_->cross_dim();
  }
  Rng r3 = rng.child(104);
  decoder_ = nn::GruCell(params_, "decoder.gru", in_dim, cfg_.decoder_hidden,
                         r3);
  Rng r4 = rng.child(105);
  out_proj_ = nn::Linear(params_, "decoder.out_proj", cfg_.decoder_hidden,
                         alphabet_.phoneme_vocab_size(), r4);
}

PhonemeSeq WindowToProns::ids_pron(const std::vector<int>& ids) const {
  PhonemeSeq out;
  for (int id : ids) {
    if (id < Alphabet::kNumSpecialIds) continue;
    out.push_back(alphabet_.phoneme_at(id));
  }
  return out;
}

Var WindowToProns::decode_step(Graph& g, Var h, Var prev_emb,
                               const std::vector<Var>& cross_states,
                               Var* h_out) const {
  Var x = prev_emb;
  if (cfg_.decoder_attention) {
    Var q = attn_query_(g, h);
    Var ctx = nn::StepAttention<float>::context(g, q, cross_states,
                                                cross_states, nullptr);
    x = g.concat_cols({x, ctx});
  }
  Var h_new = decoder_.step(g, x, h);
  *h_out = h_new;
  return out_proj_(g, h_new);
}

float WindowToProns::train_batch(const std::vector<WindowSample>& batch,
                                 Graph& g) {
  if (batch.empty()) throw DataError("empty training batch");
  const int b = static_cast<int>(batch.size());
  std::vector<Window5> windows;
  windows.reserve(batch.size());
  int tgt_max = 1;
  for (const WindowSample& s : batch) {
    windows.push_back(s.window);
    tgt_max = std::max(tgt_max, static_cast<int>(s.target.size()) + 1);
  }
  NGramEncoder::Encoded enc = encoder_->encode(g, windows);
  Var h = g.tanh(init_h_(
      g, g.concat_cols({enc.word_reprs[Window5::kTarget], enc.cross_middle})));

  std::vector<Var> step_logits;
  std::vector<int> targets;
  targets.reserve(static_cast<size_t>(b) * tgt_max);
  for (int t = 0; t < tgt_max; ++t) {
    std::vector<int> prev(b);
    for (int s = 0; s < b; ++s) {
      const PhonemeSeq& tgt = batch[s].target;
      if (t == 0) {
        prev[s] = Alphabet::kBosId;
      } else if (t - 1 < static_cast<int>(tgt.size())) {
        prev[s] = alphabet_.phoneme_id(tgt[t - 1]);
      } else {
        prev[s] = Alphabet::kPadId;
      }
      // Target at step t: next phoneme, EOS at the end, PAD past it.
      int want;
      if (t < static_cast<int>(tgt.size())) {
        want = alphabet_.phoneme_id(tgt[t]);
      } else if (t == static_cast<int>(tgt.size())) {
        want = Alphabet::kEosId;
      } else {
        want = Alphabet::kPadId;
      }
      targets.push_back(want);
    }
    Var emb = phoneme_emb_(g, prev);
    emb = g.dropout(emb, cfg_.dropout);
    Var h_next;
    step_logits.push_back(decode_step(g, h, emb, enc.cross_states, &h_next));
    h = h_next;
  }
  Var logits = step_logits.size() == 1 ? step_logits[0]
                                       : g.concat_rows(step_logits);
  Var loss = g.cross_entropy(logits, targets, Alphabet::kPadId);
  const float loss_value = g.value(loss).data[0];
  if (g.train_mode()) g.backward(loss);
  return loss_value;
}

DecodeResult WindowToProns::greedy_decode(const Window5& window) const {
  Graph g(false);
  NGramEncoder::Encoded enc = encoder_->encode(g, {window});
  Var h = g.tanh(init_h_(
      g, g.concat_cols({enc.word_reprs[Window5::kTarget], enc.cross_middle})));
  DecodeResult result;
  int prev = Alphabet::kBosId;
  for (int t = 0; t < cfg_.max_pron_len; ++t) {
    Var emb = phoneme_emb_(g, std::vector<int>{prev});
    Var h_next;
    Var logits = decode_step(g, h, emb, enc.cross_states, &h_next);
    h = h_next;
    const Tensor& L = g.value(logits);
    // Stable log-softmax over the row.
    double m = L.data[0];
    for (int c = 1; c < L.cols(); ++c) {
      m = std::max(m, static_cast<double>(L.data[c]));
    }
    double z = 0;
    for (int c = 0; c < L.cols(); ++c) {
      z += std::exp(static_cast<double>(L.data[c]) - m);
    }
    const double log_z = m + std::log(z);
    int best = -1;
    double best_lp = 0;
    for (int c = 0; c < L.cols(); ++c) {
      if (c == Alphabet::kPadId || c == Alphabet::kBosId ||
          c == Alphabet::kUnkId) {
        continue;
      }
      const double lp = static_cast<double>(L.data[c]) - log_z;
      if (best < 0 || lp > best_lp) {
        best = c;
        best_lp = lp;
      }
    }
    result.log_prob += best_lp;
    if (best == Alphabet::kEosId) return result;
    result.ids.push_back(best);
    prev = best;
  }
  result.truncated = true;
  return result;
}

// ------------------------------------------------------------------ snapping

PhonemeSeq snap_to_allowed(const PhonemeSeq& decoded,
                           const std::vector<PhonemeSeq>& allowed, Rng& rng,
                           SnapMetadata* metadata) {
  if (allowed.empty()) throw DataError("snap: empty allowed set");
  SnapMetadata meta;
  meta.raw_decode = decoded;
  for (const PhonemeSeq& a : allowed) {
    if (a == decoded) {
      if (metadata) *metadata = meta;
      return decoded;
    }
  }
  meta.snapped = true;
  int best = -1;
  std::vector<int> ties;
  for (size_t i = 0; i < allowed.size(); ++i) {
    const int d = edit_distance(decoded, allowed[i]);
    if (best < 0 || d < best) {
      best = d;
      ties.assign(1, static_cast<int>(i));
    } else if (d == best) {
      ties.push_back(static_cast<int>(i));
    }
  }
  meta.distance = best;
  meta.tie_count = static_cast<int>(ties.size());
  meta.tie_index =
      ties.size() == 1 ? 0 : static_cast<int>(rng.below(ties.size()));
  if (metadata) *metadata = meta;
  return allowed[ties[meta.tie_index]];
}

// -------------------------------------------------------------- shared train

namespace {

template <typename Model, typename Row>
std::vector<TrainLogEntry> train_window_model(Model& model,
                                              std::vector<Row> rows,
                                              const TrainOptions& opts) {
  if (rows.empty()) throw DataError("empty training set");
  nn::AdamConfig acfg;
  acfg.lr = opts.lr;
  nn::Adam adam(model.params(), acfg);
  Rng rng(Rng::mix(opts.seed, 0x776e646f));
  std::vector<TrainLogEntry> log;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    adam.set_lr(scheduled_lr(opts, epoch));
    rng.shuffle(rows);
    Rng drop_rng = rng.child(static_cast<uint64_t>(epoch));
    double total = 0;
    int batches = 0;
    for (size_t off = 0; off < rows.size();
         off += static_cast<size_t>(opts.batch_size)) {
      std::vector<Row> batch(
          rows.begin() + off,
          rows.begin() + std::min(rows.size(),
                                  off + static_cast<size_t>(opts.batch_size)));
      model.params().zero_grads();
      Graph g(/*train_mode=*/true, &drop_rng);
      total += model.train_batch(batch, g);
      adam.step();
      ++batches;
    }
    TrainLogEntry e;
    e.epoch = epoch;
    e.train_loss = static_cast<float>(total / std::max(1, batches));
    log.push_back(e);
  }
  return log;
}

void copy_params_to(const nn::ParamStore& src, nn::Checkpoint& ck) {
  for (const auto* p : src.params()) {
    auto* q = ck.params.create_const(p->name, p->value.shape, 0.0f);
    q->value = p->value;
  }
}

}  // namespace

// ------------------------------------------------------------ HomographModel

HomographModel::HomographModel(const Alphabet& alphabet,
                               const ContextConfig& cfg, uint64_t seed) {
  net_ = std::make_unique<WindowToProns>(alphabet, cfg, seed);
}

PhonemeSeq HomographModel::predict_raw(const Window5& window) const {
  return net_->ids_pron(net_->greedy_decode(window).ids);
}

PhonemeSeq HomographModel::predict(const Window5& window,
                                   const std::vector<PhonemeSeq>& allowed,
                                   Rng& tie_rng, SnapMetadata* metadata) const {
  if (allowed.empty()) throw DataError("predict: empty allowed set");
  return snap_to_allowed(predict_raw(window), allowed, tie_rng, metadata);
}

void HomographModel::save(const std::string& path) const {
  nn::Checkpoint ck;
  ck.alphabet_fingerprint = net_->alphabet().fingerprint();
  ck.config = {{"model", "homograph"}, {"context", net_->config().to_json()}};
  copy_params_to(net_->params(), ck);
  ck.save(path);
}

HomographModel HomographModel::load(const std::string& path,
                                    const Alphabet& alphabet) {
  nn::Checkpoint ck = nn::Checkpoint::load(path, alphabet.fingerprint());
  if (ck.config.value("model", "") != "homograph") {
    throw CheckpointError("checkpoint is not a homograph model");
  }
  ContextConfig cfg = ContextConfig::from_json(ck.config.at("context"));
  HomographModel model(alphabet, cfg, /*seed=*/0);
  nn::restore_params(model.net_->params(), ck);
  return model;
}

HomographTrainResult train_homograph(const std::vector<WindowSample>& samples,
                                     const Alphabet& alphabet,
                                     const ContextConfig& cfg,
                                     const TrainOptions& opts) {
  HomographTrainResult out;
  out.model = std::make_unique<HomographModel>(alphabet, cfg, opts.seed);
  for (const WindowSample& s : samples) {
    if (!alphabet.valid_pron(s.target)) {
      throw DataError("gold pronunciation '" + s.target +
                      "' contains symbols outside the phoneme inventory");
    }
  }
  out.log = train_window_model(out.model->net(), samples, opts);
  return out;
}

// --------------------------------------------------------------- EzafeModelI

EzafeModelI::EzafeModelI(const Alphabet& alphabet, const ContextConfig& cfg,
                         uint64_t seed)
    : alphabet_(alphabet), cfg_(cfg) {
  Rng rng(seed);
  Rng enc_rng = rng.child(200);
  encoder_ = std::make_unique<NGramEncoder>(params_, alphabet_, cfg_, enc_rng);
  Rng r0 = rng.child(201);
  head_ = nn::Linear(params_, "head", encoder_->cross_dim(), 2, r0);
}

float EzafeModelI::train_batch(const std::vector<LabeledWindow>& batch,
                               Graph& g) {
  if (batch.empty()) throw DataError("empty training batch");
  std::vector<Window5> windows;
  std::vector<int> targets;
  for (const LabeledWindow& r : batch) {
    windows.push_back(r.window);
    targets.push_back(r.label);
  }
  NGramEncoder::Encoded enc = encoder_->encode(g, windows);
  Var logits = head_(g, enc.cross_middle);
  Var loss = g.cross_entropy(logits, targets, /*ignore_id=*/-1);
  const float loss_value = g.value(loss).data[0];
  if (g.train_mode()) g.backward(loss);
  return loss_value;
}

std::vector<EzafePrediction> EzafeModelI::predict_batch(
    const std::vector<Window5>& windows) const {
  Graph g(false);
  NGramEncoder::Encoded enc =
      encoder_->encode(g, windows);
  Var probs = g.softmax_rows(head_(g, enc.cross_middle));
  const Tensor& P = g.value(probs);
  std::vector<EzafePrediction> out;
  out.reserve(windows.size());
  for (int r = 0; r < P.rows(); ++r) {
    EzafePrediction p;
    p.prob_ezafe = P.at(r, 1);
    p.label = P.at(r, 1) > P.at(r, 0) ? 1 : 0;
    out.push_back(p);
  }
  return out;
}

EzafePrediction EzafeModelI::predict(const Window5& window) const {
  return predict_batch({window})[0];
}

void EzafeModelI::save(const std::string& path) const {
  nn::Checkpoint ck;
  ck.alphabet_fingerprint = alphabet_.fingerprint();
  ck.config = {{"model", "ezafe_i"}, {"context", cfg_.to_json()}};
  copy_params_to(params_, ck);
  ck.save(path);
}

EzafeModelI EzafeModelI::load(const std::string& path,
                              const Alphabet& alphabet) {
  nn::Checkpoint ck = nn::Checkpoint::load(path, alphabet.fingerprint());
  if (ck.config.value("model", "") != "ezafe_i") {
    throw CheckpointError("checkpoint is not an ezafe model I");
  }
  ContextConfig cfg = ContextConfig::from_json(ck.config.at("context"));
  EzafeModelI model(alphabet, cfg, /*seed=*/0);
  nn::restore_params(model.params_, ck);
  return model;
}

// -------------------------------------------------------------- EzafeModelII

namespace {
constexpr int kWordPadId = 0;
constexpr int kWordUnkId = 1;
constexpr int kWordVocabOffset = 2;
}  // namespace

EzafeModelII::EzafeModelII(const Alphabet& alphabet,
                           std::vector<std::string> vocab,
                           const ContextConfig& cfg, uint64_t seed)
    : alphabet_(alphabet), cfg_(cfg), vocab_(std::move(vocab)) {
  for (size_t i = 0; i < vocab_.size(); ++i) {
    vocab_ids_[vocab_[i]] = static_cast<int>(i) + kWordVocabOffset;
  }
  Rng rng(seed);
  Rng r0 = rng.child(300);
  word_emb_ = nn::Embedding(params_, "word_emb",
                            static_cast<int>(vocab_.size()) + kWordVocabOffset,
                            cfg_.word_embed, r0);
  Rng r1 = rng.child(301);
  gru_ = nn::BiGru(params_, "gru", cfg_.word_embed, cfg_.cross_hidden, r1);
  Rng r2 = rng.child(302);
  head_ = nn::Linear(params_, "head", 2 * cfg_.cross_hidden, 2, r2);
}

int EzafeModelII::word_id(const std::u32string& word, bool is_pad) const {
  if (is_pad) return kWordPadId;
  auto it = vocab_ids_.find(utf8::encode(word));
  return it == vocab_ids_.end() ? kWordUnkId : it->second;
}

float EzafeModelII::train_batch(const std::vector<LabeledWindow>& batch,
                                Graph& g) {
  if (batch.empty()) throw DataError("empty training batch");
  const int b = static_cast<int>(batch.size());
  std::vector<Var> steps;
  for (int slot = 0; slot < 5; ++slot) {
    std::vector<int> ids(b);
    for (int s = 0; s < b; ++s) {
      ids[s] = word_id(batch[s].window.words[slot],
                       batch[s].window.pad_mask[slot]);
    }
    Var emb = word_emb_(g, ids);
    steps.push_back(g.dropout(emb, cfg_.dropout));
  }
  nn::BiGruOut gru = gru_.run(g, steps, nullptr);
  Var logits = head_(g, gru.states[Window5::kTarget]);
  std::vector<int> targets;
  for (const LabeledWindow& r : batch) targets.push_back(r.label);
  Var loss = g.cross_entropy(logits, targets, /*ignore_id=*/-1);
  const float loss_value = g.value(loss).data[0];
  if (g.train_mode()) g.backward(loss);
  return loss_value;
}

std::vector<EzafePrediction> EzafeModelII::predict_batch(
    const std::vector<Window5>& windows) const {
  Graph g(false);
  const int b = static_cast<int>(windows.size());
  std::vector<Var> steps;
  for (int slot = 0; slot < 5; ++slot) {
    std::vector<int> ids(b);
    for (int s = 0; s < b; ++s) {
      ids[s] = word_id(windows[s].words[slot], windows[s].pad_mask[slot]);
    }
    steps.push_back(word_emb_(g, ids));
  }
  nn::BiGruOut gru = gru_.run(g, steps, nullptr);
  Var probs = g.softmax_rows(head_(g, gru.states[Window5::kTarget]));
  const Tensor& P = g.value(probs);
  std::vector<EzafePrediction> out;
  out.reserve(windows.size());
  for (int r = 0; r < P.rows(); ++r) {
    EzafePrediction p;
    p.prob_ezafe = P.at(r, 1);
    p.label = P.at(r, 1) > P.at(r, 0) ? 1 : 0;
    out.push_back(p);
  }
  return out;
}

EzafePrediction EzafeModelII::predict(const Window5& window) const {
  return predict_batch({window})[0];
}

void EzafeModelII::save(const std::string& path) const {
  nn::Checkpoint ck;
  ck.alphabet_fingerprint = alphabet_.fingerprint();
  ck.config = {{"model", "ezafe_ii"},
               {"context", cfg_.to_json()},
               {"vocab", vocab_}};
  copy_params_to(params_, ck);
  ck.save(path);
}

EzafeModelII EzafeModelII::load(const std::string& path,
                                const Alphabet& alphabet) {
  nn::Checkpoint ck = nn::Checkpoint::load(path, alphabet.fingerprint());
  if (ck.config.value("model", "") != "ezafe_ii") {
    throw CheckpointError("checkpoint is not an ezafe model II");
  }
  ContextConfig cfg = ContextConfig::from_json(ck.config.at("context"));
  std::vector<std::string> vocab =
      ck.config.at("vocab").get<std::vector<std::string>>();
  EzafeModelII model(alphabet, std::move(vocab), cfg, /*seed=*/0);
  nn::restore_params(model.params_, ck);
  return model;
}

// -------------------------------------------------------------- ezafe train

namespace {

bool all_same_label(const std::vector<LabeledWindow>& rows) {
  for (const LabeledWindow& r : rows) {
    if (r.label != rows.front().label) return false;
  }
  return true;
}

}  // namespace

EzafeTrainResultI train_ezafe_i(const std::vector<LabeledWindow>& rows,
                                const Alphabet& alphabet,
                                const ContextConfig& cfg,
                                const TrainOptions& opts) {
  EzafeTrainResultI out;
  out.single_class = !rows.empty() && all_same_label(rows);
  out.model = std::make_unique<EzafeModelI>(alphabet, cfg, opts.seed);
  out.log = train_window_model(*out.model, rows, opts);
  return out;
}

EzafeTrainResultII train_ezafe_ii(const std::vector<LabeledWindow>& rows,
                                  const Alphabet& alphabet,
                                  const ContextConfig& cfg,
                                  const TrainOptions& opts) {
  EzafeTrainResultII out;
  out.single_class = !rows.empty() && all_same_label(rows);
  // Vocabulary over every word seen in the training windows, most frequent
  // first for stable ids.
  std::map<std::string, int64_t> counts;
  for (const LabeledWindow& r : rows) {
    for (int k = 0; k < 5; ++k) {
      if (!r.window.pad_mask[k]) ++counts[utf8::encode(r.window.words[k])];
    }
  }
  std::vector<std::pair<std::string, int64_t>> by_freq(counts.begin(),
                                                       counts.end());
  std::sort(by_freq.begin(), by_freq.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> vocab;
  vocab.reserve(by_freq.size());
  for (auto& [w, c] : by_freq) vocab.push_back(w);
  out.model =
      std::make_unique<EzafeModelII>(alphabet, std::move(vocab), cfg, opts.seed);
  out.log = train_window_model(*out.model, rows, opts);
  return out;
}

}  // namespace models
}  // namespace g2p
