#include "g2p/models/e2e_baseline.hpp"

#include <algorithm>

#include "g2p/nn/checkpoint.hpp"
#include "g2p/utf8.hpp"

namespace g2p {
namespace models {

namespace {

void check_word(const std::u32string& word) {
  for (char32_t c : word) {
    if (c == Alphabet::kBorder || c == Alphabet::kOpen || c == Alphabet::kClose) {
      throw DataError("word '" + utf8::encode(word) +
                      "' contains a reserved border symbol");
    }
  }
}

}  // namespace

std::u32string format_bordered(const Window5& window, bool border_all) {
  std::array<std::u32string, 5> w;
  for (int k = 0; k < 5; ++k) {
    if (!window.pad_mask[k]) {
      check_word(window.words[k]);
      w[k] = window.words[k];
    }
  }
  std::u32string out;
  out += w[0];
  out += Alphabet::kBorder;
  out += w[1];
  if (border_all) out += Alphabet::kBorder;
  out += Alphabet::kOpen;
  out += w[2];
  out += Alphabet::kClose;
  if (border_all) out += Alphabet::kBorder;
  out += w[3];
  out += Alphabet::kBorder;
  out += w[4];
  return out;
}

Window5 parse_bordered(const std::u32string& text) {
  const size_t open = text.find(Alphabet::kOpen);
  const size_t close = text.find(Alphabet::kClose);
  if (open == std::u32string::npos || close == std::u32string::npos ||
      close < open ||
      text.find(Alphabet::kOpen, open + 1) != std::u32string::npos ||
      text.find(Alphabet::kClose, close + 1) != std::u32string::npos) {
    throw DataError("bordered input needs exactly one (middle) group");
  }
  std::u32string middle = text.substr(open + 1, close - open - 1);
  std::u32string left = text.substr(0, open);
  std::u32string right = text.substr(close + 1);
  // One '#' separates the outer pair; a second one butting against the
  // parenthesis belongs to the all-borders layout and is dropped.
  auto split_two = [](std::u32string s, bool strip_back, const char* side) {
    const auto borders = std::count(s.begin(), s.end(),
                                    static_cast<char32_t>(Alphabet::kBorder));
    if (borders == 2) {
      if (strip_back && s.back() == Alphabet::kBorder) {
        s.pop_back();
      } else if (!strip_back && s.front() == Alphabet::kBorder) {
        s.erase(0, 1);
      } else {
        throw DataError(std::string("malformed ") + side +
                        " segments in bordered input");
      }
    } else if (borders != 1) {
      throw DataError(std::string("expected exactly two ") + side +
                      " segments in bordered input");
    }
    std::array<std::u32string, 2> parts;
    const size_t pos = s.find(Alphabet::kBorder);
    parts[0] = s.substr(0, pos);
    parts[1] = s.substr(pos + 1);
    return parts;
  };
  auto l = split_two(left, /*strip_back=*/true, "left");
  auto r = split_two(right, /*strip_back=*/false, "right");
  if (middle.empty()) throw DataError("bordered input has an empty middle word");

  Window5 w;
  const std::u32string pad = utf8::decode(Alphabet::kPadText);
  auto put = [&](int slot, const std::u32string& word) {
    if (word.empty()) {
      w.words[slot] = pad;
      w.pad_mask[slot] = true;
    } else {
      w.words[slot] = word;
      w.pad_mask[slot] = false;
    }
  };
  put(0, l[0]);
  put(1, l[1]);
  put(2, middle);
  put(3, r[0]);
  put(4, r[1]);
  return w;
}

nlohmann::json E2eConfig::to_json() const {
  return {{"d_model", d_model},       {"heads", heads},
          {"enc_layers", enc_layers}, {"dec_layers", dec_layers},
          {"ffn", ffn},               {"dropout", dropout},
          {"max_word_len", max_word_len}, {"max_pron_len", max_pron_len},
          {"border_all", border_all}};
}

E2eConfig E2eConfig::from_json(const nlohmann::json& j) {
  E2eConfig c;
  c.d_model = j.at("d_model");
  c.heads = j.at("heads");
  c.enc_layers = j.at("enc_layers");
  c.dec_layers = j.at("dec_layers");
  c.ffn = j.at("ffn");
  c.dropout = j.at("dropout");
  c.max_word_len = j.at("max_word_len");
  c.max_pron_len = j.at("max_pron_len");
  c.border_all = j.at("border_all");
  return c;
}

E2eTransformer::E2eTransformer(const Alphabet& alphabet, const E2eConfig& cfg,
                               uint64_t seed)
    : alphabet_(alphabet), cfg_(cfg) {
  Seq2SeqConfig sc;
  // Three extra source ids for the border and parenthesis markers.
  border_id_ = alphabet.grapheme_vocab_size();
  open_id_ = border_id_ + 1;
  close_id_ = border_id_ + 2;
  sc.src_vocab = alphabet.grapheme_vocab_size() + 3;
  sc.tgt_vocab = alphabet.phoneme_vocab_size();
  sc.d_model = cfg.d_model;
  sc.heads = cfg.heads;
  sc.enc_layers = cfg.enc_layers;
  sc.dec_layers = cfg.dec_layers;
  sc.ffn = cfg.ffn;
  sc.dropout = cfg.dropout;
  sc.max_src = cfg.max_src();
  sc.max_tgt = cfg.max_pron_len;
  net_ = std::make_unique<TransformerSeq2Seq>(sc, seed);
}

std::vector<int> E2eTransformer::window_ids(const Window5& window) const {
  std::u32string text = format_bordered(window, cfg_.border_all);
  std::vector<int> ids;
  ids.reserve(text.size());
  for (char32_t c : text) {
    if (c == Alphabet::kBorder) {
      ids.push_back(border_id_);
    } else if (c == Alphabet::kOpen) {
      ids.push_back(open_id_);
    } else if (c == Alphabet::kClose) {
      ids.push_back(close_id_);
    } else {
      ids.push_back(alphabet_.grapheme_id(c));
    }
  }
  if (static_cast<int>(ids.size()) > cfg_.max_src()) {
    ids.resize(cfg_.max_src());
  }
  return ids;
}

std::vector<int> E2eTransformer::pron_ids(const PhonemeSeq& pron) const {
  std::vector<int> ids;
  for (char p : pron) {
    const int id = alphabet_.phoneme_id(p);
    if (id == Alphabet::kUnkId) {
      throw DataError(std::string("pronunciation symbol '") + p +
                      "' is not in the phoneme inventory");
    }
    ids.push_back(id);
  }
  return ids;
}

float E2eTransformer::train_batch(const std::vector<WindowSample>& batch,
                                  nn::Graph& g) {
  std::vector<IdPair> pairs;
  pairs.reserve(batch.size());
  for (const WindowSample& s : batch) {
    pairs.push_back(IdPair{window_ids(s.window), pron_ids(s.target)});
  }
  return net_->train_batch(pairs, g);
}

E2ePrediction E2eTransformer::predict(const Window5& window, int beam) const {
  DecodeResult r = net_->beam_decode(window_ids(window), beam);
  E2ePrediction p;
  for (int id : r.ids) {
    if (id >= Alphabet::kNumSpecialIds) p.pron.push_back(alphabet_.phoneme_at(id));
  }
  p.log_prob = r.log_prob;
  p.truncated = r.truncated;
  return p;
}

void E2eTransformer::save(const std::string& path) const {
  nn::Checkpoint ck;
  ck.alphabet_fingerprint = alphabet_.fingerprint();
  ck.config = {{"model", "e2e_transformer"}, {"e2e", cfg_.to_json()}};
  for (const auto* p : net_->params().params()) {
    auto* q = ck.params.create_const(p->name, p->value.shape, 0.0f);
    q->value = p->value;
  }
  ck.save(path);
}

E2eTransformer E2eTransformer::load(const std::string& path,
                                    const Alphabet& alphabet) {
  nn::Checkpoint ck = nn::Checkpoint::load(path, alphabet.fingerprint());
  if (ck.config.value("model", "") != "e2e_transformer") {
    throw CheckpointError("checkpoint is not an e2e transformer");
  }
  E2eConfig cfg = E2eConfig::from_json(ck.config.at("e2e"));
  E2eTransformer model(alphabet, cfg, /*seed=*/0);
  nn::restore_params(model.net_->params(), ck);
  return model;
}

E2eGru::E2eGru(const Alphabet& alphabet, ContextConfig cfg, uint64_t seed) {
  cfg.decoder_attention = true;  // this variant is defined by its attention
  net_ = std::make_unique<WindowToProns>(alphabet, cfg, seed);
}

E2ePrediction E2eGru::predict(const Window5& window) const {
  DecodeResult r = net_->greedy_decode(window);
  E2ePrediction p;
  p.pron = net_->ids_pron(r.ids);
  p.log_prob = r.log_prob;
  p.truncated = r.truncated;
  return p;
}

void E2eGru::save(const std::string& path) const {
  nn::Checkpoint ck;
  ck.alphabet_fingerprint = net_->alphabet().fingerprint();
  ck.config = {{"model", "e2e_gru"}, {"context", net_->config().to_json()}};
  for (const auto* p : net_->params().params()) {
    auto* q = ck.params.create_const(p->name, p->value.shape, 0.0f);
    q->value = p->value;
  }
  ck.save(path);
}

E2eGru E2eGru::load(const std::string& path, const Alphabet& alphabet) {
  nn::Checkpoint ck = nn::Checkpoint::load(path, alphabet.fingerprint());
  if (ck.config.value("model", "") != "e2e_gru") {
    throw CheckpointError("checkpoint is not an e2e gru model");
  }
  ContextConfig cfg = ContextConfig::from_json(ck.config.at("context"));
  E2eGru model(alphabet, cfg, /*seed=*/0);
  nn::restore_params(model.net_->params(), ck);
  return model;
}

namespace {

template <typename Model>
std::vector<TrainLogEntry> run_training(Model& model,
                                        std::vector<WindowSample> rows,
                                        const TrainOptions& opts) {
  if (rows.empty()) throw DataError("empty training set");
  nn::AdamConfig acfg;
  acfg.lr = opts.lr;
  nn::Adam adam(model.params(), acfg);
  Rng rng(Rng::mix(opts.seed, 0x65326565));
  std::vector<TrainLogEntry> log;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    adam.set_lr(scheduled_lr(opts, epoch));
    rng.shuffle(rows);
    Rng drop_rng = rng.child(static_cast<uint64_t>(epoch));
    double total = 0;
    int batches = 0;
    for (size_t off = 0; off < rows.size();
         off += static_cast<size_t>(opts.batch_size)) {
      std::vector<WindowSample> batch(
          rows.begin() + off,
          rows.begin() + std::min(rows.size(),
                                  off + static_cast<size_t>(opts.batch_size)));
      model.params().zero_grads();
      nn::Graph g(/*train_mode=*/true, &drop_rng);
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

}  // namespace

E2eTrainResult train_e2e(const std::vector<WindowSample>& samples,
                         const Alphabet& alphabet, E2eArch arch,
                         const E2eConfig& e2e_cfg, const ContextConfig& gru_cfg,
                         const TrainOptions& opts) {
  E2eTrainResult out;
  for (const WindowSample& s : samples) {
    if (!alphabet.valid_pron(s.target)) {
      throw DataError("gold pronunciation '" + s.target +
                      "' contains symbols outside the phoneme inventory");
    }
  }
  if (arch == E2eArch::kTransformer) {
    out.transformer =
        std::make_unique<E2eTransformer>(alphabet, e2e_cfg, opts.seed);
    out.log = run_training(*out.transformer, samples, opts);
  } else {
    out.gru = std::make_unique<E2eGru>(alphabet, gru_cfg, opts.seed);
    out.log = run_training(*out.gru, samples, opts);
  }
  return out;
}

}  // namespace models
}  // namespace g2p
