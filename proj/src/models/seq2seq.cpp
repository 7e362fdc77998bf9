#include "g2p/models/seq2seq.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "g2p/alphabet.hpp"

namespace g2p {
namespace models {

using nn::Graph;
using nn::Tensor;
using nn::Var;

nlohmann::json Seq2SeqConfig::to_json() const {
  return {{"src_vocab", src_vocab}, {"tgt_vocab", tgt_vocab},
          {"d_model", d_model},     {"heads", heads},
          {"enc_layers", enc_layers}, {"dec_layers", dec_layers},
          {"ffn", ffn},             {"dropout", dropout},
          {"max_src", max_src},     {"max_tgt", max_tgt}};
}

Seq2SeqConfig Seq2SeqConfig::from_json(const nlohmann::json& j) {
  Seq2SeqConfig c;
  c.src_vocab = j.at("src_vocab");
  c.tgt_vocab = j.at("tgt_vocab");
  c.d_model = j.at("d_model");
  c.heads = j.at("heads");
  c.enc_layers = j.at("enc_layers");
  c.dec_layers = j.at("dec_layers");
  c.ffn = j.at("ffn");
  c.dropout = j.at("dropout");
  c.max_src = j.at("max_src");
  c.max_tgt = j.at("max_tgt");
  return c;
}

TransformerSeq2Seq::TransformerSeq2Seq(Seq2SeqConfig cfg, uint64_t seed)
    : cfg_(cfg) {
  Rng rng(seed);
  int stream = 0;
  auto next_rng = [&]() { return rng.child(static_cast<uint64_t>(stream++)); };
  Rng r0 = next_rng();
  src_emb_ = nn::Embedding(params_, "src_emb", cfg_.src_vocab, cfg_.d_model, r0);
  Rng r1 = next_rng();
  tgt_emb_ = nn::Embedding(params_, "tgt_emb", cfg_.tgt_vocab, cfg_.d_model, r1);
  for (int i = 0; i < cfg_.enc_layers; ++i) {
    Rng r = next_rng();
    enc_.emplace_back(params_, "enc" + std::to_string(i), cfg_.d_model,
                      cfg_.heads, cfg_.ffn, /*cross=*/false, cfg_.dropout, r);
  }
  for (int i = 0; i < cfg_.dec_layers; ++i) {
    Rng r = next_rng();
    dec_.emplace_back(params_, "dec" + std::to_string(i), cfg_.d_model,
                      cfg_.heads, cfg_.ffn, /*cross=*/true, cfg_.dropout, r);
  }
  Rng r2 = next_rng();
  out_proj_ = nn::Linear(params_, "out_proj", cfg_.d_model, cfg_.tgt_vocab, r2);
  pos_ = nn::sinusoid_positions<float>(
      std::max(cfg_.max_src, cfg_.max_tgt + 1), cfg_.d_model);
}

Var TransformerSeq2Seq::encode(Graph& g,
                               const std::vector<std::vector<int>>& srcs,
                               int src_max,
                               const std::vector<int>& src_lens) const {
  const int batch = static_cast<int>(srcs.size());
  std::vector<int> flat;
  flat.reserve(static_cast<size_t>(batch) * src_max);
  for (const auto& s : srcs) {
    for (int id : s) flat.push_back(id);
    for (size_t k = s.size(); k < static_cast<size_t>(src_max); ++k) {
      flat.push_back(Alphabet::kPadId);
    }
  }
  Var x = g.embedding(src_emb_.table, flat);
  x = g.affine(x, static_cast<float>(std::sqrt(cfg_.d_model)), 0.0f);
  Tensor pos = Tensor::zeros({batch * src_max, cfg_.d_model});
  for (int s = 0; s < batch; ++s) {
    for (int t = 0; t < src_max; ++t) {
      for (int d = 0; d < cfg_.d_model; ++d) {
        pos.at(s * src_max + t, d) = pos_.at(t, d);
      }
    }
  }
  x = g.add(x, g.input(std::move(pos)));
  x = g.dropout(x, cfg_.dropout);
  Var penalty = g.input(nn::attention_penalty<float>(src_lens, src_max,
                                                     src_lens, src_max,
                                                     /*causal=*/false));
  for (const auto& block : enc_) {
    x = block(g, x, batch, src_max, penalty);
  }
  return x;
}

Var TransformerSeq2Seq::decode_logits(Graph& g, Var memory,
                                      const std::vector<int>& src_lens,
                                      int src_max,
                                      const std::vector<std::vector<int>>& tgt_in,
                                      int tgt_max,
                                      const std::vector<int>& tgt_lens) const {
  const int batch = static_cast<int>(tgt_in.size());
  std::vector<int> flat;
  flat.reserve(static_cast<size_t>(batch) * tgt_max);
  for (const auto& s : tgt_in) {
    for (int id : s) flat.push_back(id);
    for (size_t k = s.size(); k < static_cast<size_t>(tgt_max); ++k) {
      flat.push_back(Alphabet::kPadId);
    }
  }
  Var x = g.embedding(tgt_emb_.table, flat);
  x = g.affine(x, static_cast<float>(std::sqrt(cfg_.d_model)), 0.0f);
  Tensor pos = Tensor::zeros({batch * tgt_max, cfg_.d_model});
  for (int s = 0; s < batch; ++s) {
    for (int t = 0; t < tgt_max; ++t) {
      for (int d = 0; d < cfg_.d_model; ++d) {
        pos.at(s * tgt_max + t, d) = pos_.at(t, d);
      }
    }
  }
  x = g.add(x, g.input(std::move(pos)));
  x = g.dropout(x, cfg_.dropout);
  Var self_penalty = g.input(nn::attention_penalty<float>(
      tgt_lens, tgt_max, tgt_lens, tgt_max, /*causal=*/true));
  Var cross_penalty = g.input(nn::attention_penalty<float>(
      tgt_lens, tgt_max, src_lens, src_max, /*causal=*/false));
  for (const auto& block : dec_) {
    x = block.decode(g, x, batch, tgt_max, self_penalty, memory, src_max,
                     cross_penalty);
  }
  return out_proj_(g, x);
}

float TransformerSeq2Seq::train_batch(const std::vector<IdPair>& batch,
                                      Graph& g) {
  const int b = static_cast<int>(batch.size());
  if (b == 0) throw DataError("empty training batch");
  std::vector<std::vector<int>> srcs, tgt_in;
  std::vector<int> src_lens, tgt_lens;
  int src_max = 1, tgt_max = 1;
  for (const IdPair& p : batch) {
    srcs.push_back(p.src);
    src_lens.push_back(static_cast<int>(p.src.size()));
    std::vector<int> in;
    in.push_back(Alphabet::kBosId);
    in.insert(in.end(), p.tgt.begin(), p.tgt.end());
    tgt_lens.push_back(static_cast<int>(in.size()));
    tgt_in.push_back(std::move(in));
    src_max = std::max(src_max, src_lens.back());
    tgt_max = std::max(tgt_max, tgt_lens.back());
  }
  Var memory = encode(g, srcs, src_max, src_lens);
  Var logits =
      decode_logits(g, memory, src_lens, src_max, tgt_in, tgt_max, tgt_lens);
  std::vector<int> targets(static_cast<size_t>(b) * tgt_max, Alphabet::kPadId);
  for (int s = 0; s < b; ++s) {
    const auto& t = batch[s].tgt;
    for (size_t k = 0; k < t.size(); ++k) {
      targets[static_cast<size_t>(s) * tgt_max + k] = t[k];
    }
    targets[static_cast<size_t>(s) * tgt_max + t.size()] = Alphabet::kEosId;
  }
  Var loss = g.cross_entropy(logits, targets, Alphabet::kPadId);
  const float loss_value = g.value(loss).data[0];
  if (g.train_mode()) g.backward(loss);
  return loss_value;
}

float TransformerSeq2Seq::eval_loss(const std::vector<IdPair>& batch) {
  Graph g(/*train_mode=*/false);
  return train_batch(batch, g);
}

namespace {

// Softmax row of logits -> log-probabilities in double precision.
std::vector<double> log_softmax_row(const Tensor& logits, int row) {
  const int cols = logits.cols();
  double m = logits.at(row, 0);
  for (int c = 1; c < cols; ++c) {
    m = std::max(m, static_cast<double>(logits.at(row, c)));
  }
  double sum = 0;
  for (int c = 0; c < cols; ++c) {
    sum += std::exp(static_cast<double>(logits.at(row, c)) - m);
  }
  const double log_z = m + std::log(sum);
  std::vector<double> out(cols);
  for (int c = 0; c < cols; ++c) {
    out[c] = static_cast<double>(logits.at(row, c)) - log_z;
  }
  return out;
}

struct Hyp {
  std::vector<int> ids;  // without BOS
  double log_prob = 0.0;
};

bool better(const DecodeResult& a, const DecodeResult& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  return a.ids < b.ids;  // deterministic tie-break
}

}  // namespace

double TransformerSeq2Seq::score(const std::vector<int>& src,
                                 const std::vector<int>& tgt) const {
  Graph g(false);
  std::vector<int> src_lens = {static_cast<int>(src.size())};
  const int src_max = std::max(1, src_lens[0]);
  Var memory = encode(g, {src}, src_max, src_lens);
  std::vector<int> in;
  in.push_back(Alphabet::kBosId);
  in.insert(in.end(), tgt.begin(), tgt.end());
  std::vector<int> tgt_lens = {static_cast<int>(in.size())};
  Var logits = decode_logits(g, memory, src_lens, src_max, {in},
                             static_cast<int>(in.size()), tgt_lens);
  double total = 0;
  const Tensor& L = g.value(logits);
  for (size_t t = 0; t < in.size(); ++t) {
    const int want = t < tgt.size() ? tgt[t] : Alphabet::kEosId;
    total += log_softmax_row(L, static_cast<int>(t))[want];
  }
  return total;
}

DecodeResult TransformerSeq2Seq::greedy_decode(const std::vector<int>& src) const {
  return beam_decode(src, 1);
}

DecodeResult TransformerSeq2Seq::beam_decode(const std::vector<int>& src,
                                             int beam) const {
  if (src.empty()) throw DataError("cannot decode an empty source");
  if (static_cast<int>(src.size()) > cfg_.max_src) {
    throw DataError("source length " + std::to_string(src.size()) +
                    " exceeds max " + std::to_string(cfg_.max_src));
  }
  if (beam < 1) throw DataError("beam width must be >= 1");

  Graph g(false);
  std::vector<int> src_lens = {static_cast<int>(src.size())};
  const int src_max = src_lens[0];
  Var memory = encode(g, {src}, src_max, src_lens);
  const Tensor memory_value = g.value(memory);

  auto step_logprobs = [&](const std::vector<int>& prefix) {
    Graph gd(false);
    Var mem = gd.input(memory_value);
    std::vector<int> in;
    in.push_back(Alphabet::kBosId);
    in.insert(in.end(), prefix.begin(), prefix.end());
    std::vector<int> tgt_lens = {static_cast<int>(in.size())};
    Var logits = decode_logits(gd, mem, src_lens, src_max, {in},
                               static_cast<int>(in.size()), tgt_lens);
    return log_softmax_row(gd.value(logits), static_cast<int>(in.size()) - 1);
  };

  DecodeResult best;
  best.log_prob = -1e300;
  bool have_best = false;

  // Progressive widening: the completed pool only grows with the width, so a
  // wider beam never returns a lower-scoring sequence.
  for (int width = 1; width <= beam; ++width) {
    std::vector<Hyp> alive = {Hyp{}};
    for (int t = 0; t < cfg_.max_tgt && !alive.empty(); ++t) {
      std::vector<Hyp> candidates;
      for (const Hyp& h : alive) {
        const std::vector<double> lp = step_logprobs(h.ids);
        for (int id = 0; id < cfg_.tgt_vocab; ++id) {
          // PAD/BOS/UNK are never legal emissions: outputs stay inside the
          // phoneme inventory.
          if (id == Alphabet::kPadId || id == Alphabet::kBosId ||
              id == Alphabet::kUnkId) {
            continue;
          }
          if (id == Alphabet::kEosId) {
            DecodeResult done;
            done.ids = h.ids;
            done.log_prob = h.log_prob + lp[id];
            done.truncated = false;
            if (!have_best || better(done, best)) {
              best = done;
              have_best = true;
            }
            continue;
          }
          Hyp next;
          next.ids = h.ids;
          next.ids.push_back(id);
          next.log_prob = h.log_prob + lp[id];
          candidates.push_back(std::move(next));
        }
      }
      std::sort(candidates.begin(), candidates.end(),
                [](const Hyp& a, const Hyp& b) {
                  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
                  return a.ids < b.ids;
                });
      if (static_cast<int>(candidates.size()) > width) {
        candidates.resize(width);
      }
      if (t + 1 == cfg_.max_tgt && !have_best && !candidates.empty()) {
        // Nothing finished within the budget; keep the best prefix.
        DecodeResult done;
        done.ids = candidates.front().ids;
        done.log_prob = candidates.front().log_prob;
        done.truncated = true;
        best = done;
        have_best = true;
      }
      alive = std::move(candidates);
    }
  }
  return best;
}

double scheduled_lr(const TrainOptions& opts, int epoch) {
  if (!opts.lr_halving) return opts.lr;
  const double frac = opts.epochs <= 1
                          ? 0.0
                          : static_cast<double>(epoch) / opts.epochs;
  if (frac >= 0.75) return opts.lr * 0.25;
  if (frac >= 0.5) return opts.lr * 0.5;
  return opts.lr;
}

std::vector<TrainLogEntry> train_seq2seq(TransformerSeq2Seq& model,
                                         std::vector<IdPair> train,
                                         const std::vector<IdPair>& val,
                                         const TrainOptions& opts) {
  if (train.empty()) throw DataError("empty training set");
  nn::AdamConfig acfg;
  acfg.lr = opts.lr;
  nn::Adam adam(model.params(), acfg);
  Rng rng(Rng::mix(opts.seed, 0x7261696e));
  std::vector<TrainLogEntry> log;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    adam.set_lr(scheduled_lr(opts, epoch));
    rng.shuffle(train);
    double total = 0;
    int batches = 0;
    Rng drop_rng = rng.child(static_cast<uint64_t>(epoch));
    for (size_t off = 0; off < train.size(); off += opts.batch_size) {
      std::vector<IdPair> batch(
          train.begin() + off,
          train.begin() + std::min(train.size(),
                                   off + static_cast<size_t>(opts.batch_size)));
      model.params().zero_grads();
      Graph g(/*train_mode=*/true, &drop_rng);
      total += model.train_batch(batch, g);
      adam.step();
      ++batches;
    }
    TrainLogEntry entry;
    entry.epoch = epoch;
    entry.train_loss = static_cast<float>(total / std::max(1, batches));
    if (!val.empty()) {
      double v = 0;
      int vb = 0;
      for (size_t off = 0; off < val.size(); off += opts.batch_size) {
        std::vector<IdPair> batch(
            val.begin() + off,
            val.begin() + std::min(val.size(),
                                   off + static_cast<size_t>(opts.batch_size)));
        v += model.eval_loss(batch);
        ++vb;
      }
      entry.val_loss = static_cast<float>(v / std::max(1, vb));
    }
    if (opts.verbose) {
      std::cerr << "epoch " << epoch << " train_loss " << entry.train_loss
                << " val_loss " << entry.val_loss << "\n";
    }
    log.push_back(entry);
  }
  return log;
}

}  // namespace models
}  // namespace g2p
