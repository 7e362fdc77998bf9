#include "g2p/models/oov_model.hpp"

#include "g2p/io_util.hpp"
#include "g2p/nn/checkpoint.hpp"
#include "g2p/utf8.hpp"

namespace g2p {
namespace models {

namespace {

Seq2SeqConfig to_seq2seq(const Alphabet& alphabet, const OovConfig& cfg) {
  Seq2SeqConfig s;
  s.src_vocab = alphabet.grapheme_vocab_size();
  s.tgt_vocab = alphabet.phoneme_vocab_size();
  s.d_model = cfg.d_model;
  s.heads = cfg.heads;
  s.enc_layers = cfg.enc_layers;
  s.dec_layers = cfg.dec_layers;
  s.ffn = cfg.ffn;
  s.dropout = cfg.dropout;
  s.max_src = cfg.max_word_len;
  s.max_tgt = cfg.max_pron_len;
  return s;
}

}  // namespace

OovModel::OovModel(const Alphabet& alphabet, const OovConfig& cfg,
                   uint64_t seed)
    : alphabet_(alphabet), cfg_(cfg) {
  net_ = std::make_unique<TransformerSeq2Seq>(to_seq2seq(alphabet, cfg), seed);
}

std::vector<int> OovModel::word_ids(const std::u32string& word) const {
  std::vector<int> ids;
  ids.reserve(word.size());
  for (char32_t c : word) ids.push_back(alphabet_.grapheme_id(c));
  return ids;
}

std::vector<int> OovModel::pron_ids(const PhonemeSeq& pron) const {
  std::vector<int> ids;
  ids.reserve(pron.size());
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

PhonemeSeq OovModel::ids_pron(const std::vector<int>& ids) const {
  PhonemeSeq out;
  out.reserve(ids.size());
  for (int id : ids) {
    if (id < Alphabet::kNumSpecialIds) continue;
    out.push_back(alphabet_.phoneme_at(id));
  }
  return out;
}

OovPrediction OovModel::predict(const std::u32string& word, int beam) const {
  if (word.empty()) throw DataError("cannot predict an empty word");
  if (static_cast<int>(word.size()) > cfg_.max_word_len) {
    throw DataError("word of " + std::to_string(word.size()) +
                    " characters exceeds the configured maximum of " +
                    std::to_string(cfg_.max_word_len));
  }
  DecodeResult r = net_->beam_decode(word_ids(word), beam);
  OovPrediction p;
  p.pron = ids_pron(r.ids);
  p.log_prob = r.log_prob;
  p.truncated = r.truncated;
  return p;
}

double OovModel::score(const std::u32string& word, const PhonemeSeq& pron) const {
  return net_->score(word_ids(word), pron_ids(pron));
}

void OovModel::save(const std::string& path) const {
  nn::Checkpoint ck;
  ck.alphabet_fingerprint = alphabet_.fingerprint();
  ck.config = {{"model", "oov"}, {"seq2seq", net_->config().to_json()}};
  for (const auto* p : net_->params().params()) {
    auto* q = ck.params.create_const(p->name, p->value.shape, 0.0f);
    q->value = p->value;
  }
  ck.save(path);
}

OovModel OovModel::load(const std::string& path, const Alphabet& alphabet) {
  nn::Checkpoint ck = nn::Checkpoint::load(path, alphabet.fingerprint());
  if (ck.config.value("model", "") != "oov") {
    throw CheckpointError("checkpoint is not an oov model");
  }
  Seq2SeqConfig sc = Seq2SeqConfig::from_json(ck.config.at("seq2seq"));
  OovConfig cfg;
  cfg.d_model = sc.d_model;
  cfg.heads = sc.heads;
  cfg.enc_layers = sc.enc_layers;
  cfg.dec_layers = sc.dec_layers;
  cfg.ffn = sc.ffn;
  cfg.dropout = sc.dropout;
  cfg.max_word_len = sc.max_src;
  cfg.max_pron_len = sc.max_tgt;
  OovModel model(alphabet, cfg, /*seed=*/0);
  if (model.net_->config().src_vocab != sc.src_vocab ||
      model.net_->config().tgt_vocab != sc.tgt_vocab) {
    throw CheckpointError("checkpoint vocabulary does not match the alphabet");
  }
  nn::restore_params(model.net_->params(), ck);
  return model;
}

OovTrainResult train_oov(const std::vector<TrainPair>& pairs,
                         const Alphabet& alphabet, const OovConfig& cfg,
                         const TrainOptions& opts) {
  if (pairs.empty()) throw DataError("empty training set");
  OovTrainResult out;
  out.model = std::make_unique<OovModel>(alphabet, cfg, opts.seed);
  std::vector<IdPair> ids;
  ids.reserve(pairs.size());
  for (const TrainPair& p : pairs) {
    if (p.word.empty()) throw DataError("empty word in training pairs");
    if (static_cast<int>(p.word.size()) > cfg.max_word_len) {
      throw DataError("training word '" + utf8::encode(p.word) +
                      "' exceeds the maximum word length");
    }
    if (static_cast<int>(p.pron.size()) > cfg.max_pron_len - 1) {
      throw DataError("training pronunciation '" + p.pron +
                      "' exceeds the maximum pronunciation length");
    }
    ids.push_back(IdPair{out.model->word_ids(p.word),
                         out.model->pron_ids(p.pron)});
  }
  out.log = train_seq2seq(out.model->net(), std::move(ids), {}, opts);
  return out;
}

std::vector<TrainPair> parse_train_pairs(const std::string& contents) {
  std::vector<TrainPair> pairs;
  int lineno = 0;
  for (const std::string& line : split_lines(contents)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 2) {
      throw ParseError("training pair needs word<TAB>pron", lineno, 1);
    }
    pairs.push_back({utf8::decode(cols[0]), cols[1]});
  }
  return pairs;
}

std::string serialize_train_pairs(const std::vector<TrainPair>& pairs) {
  std::string out;
  for (const TrainPair& p : pairs) {
    out += utf8::encode(p.word) + "\t" + p.pron + "\n";
  }
  return out;
}

}  // namespace models
}  // namespace g2p
