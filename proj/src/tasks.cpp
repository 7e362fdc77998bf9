#include "g2p/tasks.hpp"

#include <algorithm>
#include <functional>
#include <iostream>

#include "g2p/io_util.hpp"
#include "g2p/utf8.hpp"

namespace g2p {
namespace tasks {

DataBundle load_data(const Manifest& m) {
  DataBundle b{Alphabet::load(m.get("alphabet")),
               NormTable(),
               load_lexicon(m.get("lexicon")),
               {},
               {},
               {},
               {}};
  if (m.has("normalization")) b.norm = NormTable::load(m.get("normalization"));
  std::unordered_set<std::string> exceptions;
  if (m.has("exceptions")) {
    exceptions = parse_word_set(read_file(m.get("exceptions")));
  }
  auto corpus = load_corpus(m.get("corpus"));
  b.split = split_corpus(corpus, static_cast<uint64_t>(m.get_int("split_seed", 42)));
  FreqTable freq = count_corpus_freq(b.split.train);
  b.dicts = build_dicts(b.lexicon, &freq, exceptions);
  b.train_labels = derive_ezafe_labels(b.split.train, b.lexicon, b.alphabet);
  b.test_labels = derive_ezafe_labels(b.split.test, b.lexicon, b.alphabet);
  return b;
}

models::OovConfig oov_config(const Manifest& m) {
  models::OovConfig c;
  c.d_model = static_cast<int>(m.get_int("d_model", c.d_model));
  c.heads = static_cast<int>(m.get_int("heads", c.heads));
  c.enc_layers = static_cast<int>(m.get_int("enc_layers", c.enc_layers));
  c.dec_layers = static_cast<int>(m.get_int("dec_layers", c.dec_layers));
  c.ffn = static_cast<int>(m.get_int("ffn", c.ffn));
  c.dropout = m.get_double("dropout", c.dropout);
  c.max_word_len = static_cast<int>(m.get_int("max_word_len", c.max_word_len));
  c.max_pron_len = static_cast<int>(m.get_int("max_pron_len", c.max_pron_len));
  return c;
}

models::ContextConfig context_config(const Manifest& m) {
  models::ContextConfig c;
  c.char_embed = static_cast<int>(m.get_int("char_embed", c.char_embed));
  c.word_hidden = static_cast<int>(m.get_int("word_hidden", c.word_hidden));
  c.cross_hidden = static_cast<int>(m.get_int("cross_hidden", c.cross_hidden));
  c.decoder_hidden =
      static_cast<int>(m.get_int("decoder_hidden", c.decoder_hidden));
  c.phoneme_embed =
      static_cast<int>(m.get_int("phoneme_embed", c.phoneme_embed));
  c.word_embed = static_cast<int>(m.get_int("word_embed", c.word_embed));
  c.tied_word_encoders =
      m.get_bool("tied_word_encoders", c.tied_word_encoders);
  c.decoder_attention = m.get_bool("decoder_attention", c.decoder_attention);
  c.dropout = m.get_double("dropout", c.dropout);
  c.max_word_len = static_cast<int>(m.get_int("max_word_len", c.max_word_len));
  c.max_pron_len = static_cast<int>(m.get_int("max_pron_len", c.max_pron_len));
  return c;
}

models::E2eConfig e2e_config(const Manifest& m) {
  models::E2eConfig c;
  c.d_model = static_cast<int>(m.get_int("d_model", c.d_model));
  c.heads = static_cast<int>(m.get_int("heads", c.heads));
  c.enc_layers = static_cast<int>(m.get_int("enc_layers", c.enc_layers));
  c.dec_layers = static_cast<int>(m.get_int("dec_layers", c.dec_layers));
  c.ffn = static_cast<int>(m.get_int("ffn", c.ffn));
  c.dropout = m.get_double("dropout", c.dropout);
  c.max_word_len = static_cast<int>(m.get_int("max_word_len", c.max_word_len));
  c.max_pron_len = static_cast<int>(m.get_int("max_pron_len", c.max_pron_len));
  c.border_all = m.get_bool("border_all", c.border_all);
  return c;
}

namespace {

int64_t module_int(const Manifest& m, const std::string& module,
                   const std::string& key, int64_t fallback) {
  std::string prefixed = module + "_" + key;
  std::replace(prefixed.begin(), prefixed.end(), '-', '_');
  return m.get_int(prefixed, m.get_int(key, fallback));
}

double module_double(const Manifest& m, const std::string& module,
                     const std::string& key, double fallback) {
  std::string prefixed = module + "_" + key;
  std::replace(prefixed.begin(), prefixed.end(), '-', '_');
  return m.get_double(prefixed, m.get_double(key, fallback));
}

}  // namespace

models::TrainOptions train_options(const Manifest& m,
                                   const std::string& module) {
  models::TrainOptions o;
  o.seed = m.get_u64("seed");  // mandatory for training
  o.epochs = static_cast<int>(module_int(m, module, "epochs", 10));
  o.batch_size = static_cast<int>(module_int(m, module, "batch", 32));
  o.lr = module_double(m, module, "lr", 1e-3);
  o.verbose = m.get_bool("verbose", false);
  return o;
}

std::vector<models::TrainPair> oov_pairs(const EzafeLabelReport& labels,
                                         int dup_cap) {
  std::vector<models::TrainPair> pairs;
  std::unordered_map<std::string, int> seen;
  for (const EzafeLabel& l : labels.labels) {
    const std::u32string& word = l.window.target();
    if (dup_cap > 0) {
      int& count = seen[utf8::encode(word) + "\t" + l.base_pron];
      if (count >= dup_cap) continue;
      ++count;
    }
    pairs.push_back({word, l.base_pron});
  }
  return pairs;
}

namespace {

template <typename Row>
void cap_rows(std::vector<Row>& rows, int cap, uint64_t seed) {
  if (cap <= 0 || static_cast<int>(rows.size()) <= cap) return;
  Rng rng(Rng::mix(seed, 0x636170));
  rng.shuffle(rows);
  rows.resize(cap);
}

}  // namespace

std::vector<models::WindowSample> homograph_samples(
    const EzafeLabelReport& labels, const HomographDict& homographs,
    double nonhomograph_ratio, int cap, uint64_t seed) {
  std::vector<models::WindowSample> homo, other;
  for (const EzafeLabel& l : labels.labels) {
    models::WindowSample s{l.window, l.base_pron};
    if (homographs.count(utf8::encode(l.window.target()))) {
      homo.push_back(std::move(s));
    } else {
      other.push_back(std::move(s));
    }
  }
  Rng rng(Rng::mix(seed, 0x686f6d6f));
  rng.shuffle(other);
  const size_t keep = std::min(
      other.size(),
      static_cast<size_t>(nonhomograph_ratio * static_cast<double>(homo.size())));
  other.resize(keep);
  homo.insert(homo.end(), other.begin(), other.end());
  rng.shuffle(homo);
  cap_rows(homo, cap, seed);
  return homo;
}

std::vector<models::LabeledWindow> ezafe_rows(const EzafeLabelReport& labels,
                                              int cap, uint64_t seed) {
  std::vector<models::LabeledWindow> rows;
  rows.reserve(labels.labels.size());
  for (const EzafeLabel& l : labels.labels) {
    rows.push_back({l.window, l.label});
  }
  cap_rows(rows, cap, seed);
  return rows;
}

std::vector<models::WindowSample> e2e_samples(const EzafeLabelReport& labels,
                                              int cap, uint64_t seed) {
  std::vector<models::WindowSample> rows;
  rows.reserve(labels.labels.size());
  for (const EzafeLabel& l : labels.labels) {
    rows.push_back({l.window, l.gold_pron});
  }
  cap_rows(rows, cap, seed);
  return rows;
}

std::string checkpoint_path(const Manifest& m, const std::string& module) {
  std::string key = module + "_checkpoint";
  std::replace(key.begin(), key.end(), '-', '_');
  if (m.has(key)) return m.get(key);
  if (m.has("checkpoint_dir")) {
    return m.get("checkpoint_dir") + "/" + module + ".ckpt";
  }
  throw DataError("manifest needs '" + key + "' or 'checkpoint_dir'");
}

namespace {

std::string curve_tsv(const std::vector<models::TrainLogEntry>& log) {
  std::string out = "epoch\ttrain_loss\tval_loss\n";
  for (const auto& e : log) {
    out += std::to_string(e.epoch) + "\t" + std::to_string(e.train_loss) +
           "\t" + std::to_string(e.val_loss) + "\n";
  }
  return out;
}

}  // namespace

std::string train_module(const std::string& module, const Manifest& m) {
  DataBundle data = load_data(m);
  models::TrainOptions opts = train_options(m, module);
  const std::string out_path = checkpoint_path(m, module);
  const uint64_t cap_seed = opts.seed;
  std::vector<models::TrainLogEntry> log;

  std::cerr << "train module=" << module << " seed=" << opts.seed
            << " epochs=" << opts.epochs << " batch=" << opts.batch_size
            << " lr=" << opts.lr << " train_sentences="
            << data.split.train.size() << "\n";

  if (module == "oov") {
    auto pairs =
        oov_pairs(data.train_labels,
                  static_cast<int>(m.get_int("oov_dup_cap", 10)));
    auto res = train_oov(pairs, data.alphabet, oov_config(m), opts);
    res.model->save(out_path);
    log = std::move(res.log);
  } else if (module == "homograph") {
    auto samples = homograph_samples(
        data.train_labels, data.dicts.homograph_dict,
        m.get_double("nonhomograph_ratio", 1.0),
        static_cast<int>(m.get_int("window_cap", 0)), cap_seed);
    auto res =
        train_homograph(samples, data.alphabet, context_config(m), opts);
    res.model->save(out_path);
    log = std::move(res.log);
  } else if (module == "ezafe-i") {
    auto rows = ezafe_rows(data.train_labels,
                           static_cast<int>(m.get_int("window_cap", 0)),
                           cap_seed);
    auto res = train_ezafe_i(rows, data.alphabet, context_config(m), opts);
    if (res.single_class) {
      std::cerr << "warning: single-class training set; the classifier is "
                   "degenerate\n";
    }
    res.model->save(out_path);
    log = std::move(res.log);
  } else if (module == "ezafe-ii") {
    auto rows = ezafe_rows(data.train_labels,
                           static_cast<int>(m.get_int("window_cap", 0)),
                           cap_seed);
    auto res = train_ezafe_ii(rows, data.alphabet, context_config(m), opts);
    if (res.single_class) {
      std::cerr << "warning: single-class training set; the classifier is "
                   "degenerate\n";
    }
    res.model->save(out_path);
    log = std::move(res.log);
  } else if (module == "e2e-transformer" || module == "e2e-gru") {
    auto samples = e2e_samples(data.train_labels,
                               static_cast<int>(m.get_int("window_cap", 0)),
                               cap_seed);
    const auto arch = module == "e2e-transformer"
                          ? models::E2eArch::kTransformer
                          : models::E2eArch::kGruAttention;
    auto res = train_e2e(samples, data.alphabet, arch, e2e_config(m),
                         context_config(m), opts);
    if (res.transformer) {
      res.transformer->save(out_path);
    } else {
      res.gru->save(out_path);
    }
    log = std::move(res.log);
  } else {
    throw DataError("unknown module '" + module + "'");
  }

  write_file_atomic(out_path + ".curve.tsv", curve_tsv(log));
  if (!log.empty()) {
    std::cerr << "final train_loss=" << log.back().train_loss << "\n";
  }
  std::cerr << "saved " << out_path << "\n";
  return out_path;
}

nlohmann::json EvalResult::summary() const {
  return {{"record", "summary"},
          {"word_accuracy", word_acc.fraction()},
          {"words", word_acc.total},
          {"ezafe_accuracy", ezafe_acc.fraction()},
          {"ezafe_confusion",
           {{"tp", ezafe_acc.true_positive},
            {"fp", ezafe_acc.false_positive},
            {"tn", ezafe_acc.true_negative},
            {"fn", ezafe_acc.false_negative}}},
          {"homograph_accuracy", homograph.accuracy.fraction()},
          {"homograph_samples", homograph.accuracy.total},
          {"homograph_score", homograph.score},
          {"unique_homographs", homograph.unique_homographs},
          {"oov_words", oov_words},
          {"truncated", truncated}};
}

std::string EvalResult::report_jsonl() const {
  std::string out;
  for (const auto& line : homograph.to_jsonl()) {
    if (line.value("record", "") != "summary") out += line.dump() + "\n";
  }
  out += summary().dump() + "\n";
  return out;
}

EvalResult evaluate_system(G2pSystem& system,
                           const std::vector<CorpusSample>& test,
                           const EzafeLabelReport& test_labels,
                           const HomographDict& homographs) {
  EvalResult res;
  std::vector<PhonemeSeq> hyp, ref;
  std::vector<int> hyp_ez, ref_ez;
  std::vector<metrics::HomographSample> homo_samples;
  size_t label_idx = 0;
  for (size_t sid = 0; sid < test.size(); ++sid) {
    const CorpusSample& sentence = test[sid];
    std::string raw;
    for (size_t i = 0; i < sentence.tokens.size(); ++i) {
      if (i) raw += ' ';
      raw += sentence.tokens[i].utf8();
    }
    std::vector<WordResult> words;
    for (WordResult& r : system.convert(raw)) {
      if (r.route != Route::kPunct) words.push_back(std::move(r));
    }
    if (words.size() != sentence.tokens.size()) {
      throw DataError("evaluation alignment failure at sentence " +
                      std::to_string(sid));
    }
    for (size_t i = 0; i < words.size(); ++i) {
      const EzafeLabel& gold = test_labels.labels[label_idx++];
      const WordResult& w = words[i];
      hyp.push_back(w.pron);
      ref.push_back(gold.gold_pron);
      hyp_ez.push_back(w.ezafe);
      ref_ez.push_back(gold.label);
      if (w.route == Route::kOov) ++res.oov_words;
      if (w.truncated) ++res.truncated;
      const std::string word = w.token.utf8();
      if (homographs.count(word)) {
        homo_samples.push_back({word, gold.base_pron, w.pron_base});
      }
      res.words_tsv += std::to_string(sid) + "\t" + std::to_string(i) + "\t" +
                       route_name(w.route) + "\t" + gold.gold_pron + "\t" +
                       w.pron + "\t" + std::to_string(gold.label) + "\t" +
                       std::to_string(w.ezafe) + "\n";
    }
  }
  res.word_acc = metrics::word_accuracy(hyp, ref);
  res.ezafe_acc = metrics::ezafe_accuracy(hyp_ez, ref_ez);
  res.homograph = metrics::homograph_score(homo_samples, homographs);
  return res;
}

metrics::WordAccuracy evaluate_e2e(
    const std::function<PhonemeSeq(const Window5&)>& predict,
    const EzafeLabelReport& test_labels) {
  metrics::WordAccuracy acc;
  for (const EzafeLabel& l : test_labels.labels) {
    acc.total++;
    if (predict(l.window) == l.gold_pron) acc.correct++;
  }
  return acc;
}

}  // namespace tasks
}  // namespace g2p
