#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>

#include "g2p/edit_distance.hpp"
#include "g2p/io_util.hpp"
#include "g2p/models/e2e_baseline.hpp"
#include "g2p/models/oov_model.hpp"
#include "g2p/utf8.hpp"

using namespace g2p;
using namespace g2p::models;

namespace {

// Small alphabet shared by most cases here.
Alphabet tiny_alphabet() {
  Alphabet a;
  for (char c = 'a'; c <= 'h'; ++c) a.add_grapheme(static_cast<char32_t>(c));
  a.add_phoneme('e', PhonemeClass::kVowel);
  a.add_phoneme('o', PhonemeClass::kVowel);
  a.add_phoneme('k', PhonemeClass::kConsonant);
  a.add_phoneme('y', PhonemeClass::kConsonant);
  return a;
}

Window5 window_of(const std::vector<std::string>& words) {
  Window5 w;
  for (int k = 0; k < 5; ++k) {
    if (words[k] == "<PAD>") {
      w.words[k] = utf8::decode(Alphabet::kPadText);
      w.pad_mask[k] = true;
    } else {
      w.words[k] = utf8::decode(words[k]);
      w.pad_mask[k] = false;
    }
  }
  return w;
}

}  // namespace

TEST_CASE("snapping returns allowed pronunciations at minimum distance") {
  Rng rng(1);
  // Already allowed: unchanged.
  {
    SnapMetadata meta;
    PhonemeSeq out = snap_to_allowed("kek", {"koy", "kek"}, rng, &meta);
    CHECK(out == "kek");
    CHECK_FALSE(meta.snapped);
    CHECK(meta.distance == 0);
  }
  // The worked example: distances verified against the brute-force oracle
  // before being frozen here.
  {
    const PhonemeSeq decoded = "mibrd";
    const std::vector<PhonemeSeq> allowed = {"mib/r/d", "mibor/d", "mibord"};
    CHECK(edit_distance(decoded, allowed[0]) == 2);
    CHECK(edit_distance(decoded, allowed[1]) == 2);
    CHECK(edit_distance(decoded, allowed[2]) == 1);
    SnapMetadata meta;
    PhonemeSeq out = snap_to_allowed(decoded, allowed, rng, &meta);
    CHECK(out == "mibord");
    CHECK(meta.distance == 1);
    CHECK(meta.tie_count == 1);
  }
  // Equidistant candidates: the seeded draw is deterministic and the result
  // stays in the allowed set.
  {
    const std::vector<PhonemeSeq> allowed = {"kee", "keo"};
    Rng r1(99), r2(99);
    SnapMetadata m1, m2;
    PhonemeSeq a = snap_to_allowed("key", allowed, r1, &m1);
    PhonemeSeq b = snap_to_allowed("key", allowed, r2, &m2);
    CHECK(a == b);
    CHECK(m1.tie_count == 2);
    CHECK(m1.tie_index == m2.tie_index);
    CHECK((a == allowed[0] || a == allowed[1]));
  }
  CHECK_THROWS_AS(snap_to_allowed("k", {}, rng), DataError);
}

TEST_CASE("snapping minimality on randomized pairs") {
  Rng rng(2);
  auto random_pron = [&](int max_len) {
    const char symbols[] = "ekoy";
    PhonemeSeq p;
    const int len = 1 + static_cast<int>(rng.below(max_len));
    for (int i = 0; i < len; ++i) p.push_back(symbols[rng.below(4)]);
    return p;
  };
  for (int iter = 0; iter < 2000; ++iter) {
    PhonemeSeq decoded = random_pron(6);
    std::vector<PhonemeSeq> allowed;
    const int n = 1 + static_cast<int>(rng.below(4));
    for (int i = 0; i < n; ++i) allowed.push_back(random_pron(6));
    SnapMetadata meta;
    PhonemeSeq out = snap_to_allowed(decoded, allowed, rng, &meta);
    int best = edit_distance(decoded, allowed[0]);
    bool found = false;
    for (const PhonemeSeq& a : allowed) {
      best = std::min(best, edit_distance(decoded, a));
      found = found || a == out;
    }
    CHECK(found);
    CHECK(edit_distance(decoded, out) == best);
  }
}

TEST_CASE("oov training fits pairs and reproduces a known transcription") {
  Alphabet fa =
      Alphabet::load(std::string(G2P_SOURCE_DIR) + "/data/alphabet_fa.tsv");
  std::vector<TrainPair> pairs = {
      {utf8::decode("شکسته"), "$ek/ste"},  {utf8::decode("کتاب"), "ketab"},
      {utf8::decode("قلم"), "q/l/m"},      {utf8::decode("مداد"), "medad"},
      {utf8::decode("خودکار"), "xodkar"},  {utf8::decode("کار"), "kar"},
      {utf8::decode("شب"), "$/b"},         {utf8::decode("روز"), "ruz"},
  };
  OovConfig cfg;
  cfg.d_model = 32;
  cfg.heads = 2;
  cfg.enc_layers = 1;
  cfg.dec_layers = 1;
  cfg.ffn = 64;
  cfg.dropout = 0.0;
  TrainOptions opts;
  opts.epochs = 150;
  opts.batch_size = 8;
  opts.lr = 3e-3;
  opts.seed = 11;
  auto res = train_oov(pairs, fa, cfg, opts);
  for (const TrainPair& p : pairs) {
    CHECK(res.model->predict(p.word, 1).pron == p.pron);
  }
  // Outputs stay inside the phoneme inventory even for unseen words.
  OovPrediction pred = res.model->predict(utf8::decode("کتابشان"), 1);
  CHECK(fa.valid_pron(pred.pron));

  // Checkpoint round trip preserves predictions bit-for-bit.
  const std::string path =
      (std::filesystem::temp_directory_path() / "g2p_oov_test.ckpt").string();
  res.model->save(path);
  OovModel back = OovModel::load(path, fa);
  for (const TrainPair& p : pairs) {
    CHECK(back.predict(p.word, 1).pron == res.model->predict(p.word, 1).pron);
  }
  Alphabet other = tiny_alphabet();
  CHECK_THROWS_AS(OovModel::load(path, other), CheckpointError);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(res.model->predict(std::u32string(), 1), DataError);
  CHECK_THROWS_AS(res.model->predict(std::u32string(40, U'ب'), 1), DataError);
  CHECK_THROWS_AS(train_oov({}, fa, cfg, opts), DataError);
}

TEST_CASE("oov training is deterministic under a fixed seed") {
  Alphabet a = tiny_alphabet();
  std::vector<TrainPair> pairs = {{U"ab", "ko"}, {U"ba", "ok"}, {U"abc", "koy"}};
  OovConfig cfg;
  cfg.d_model = 16;
  cfg.heads = 2;
  cfg.enc_layers = 1;
  cfg.dec_layers = 1;
  cfg.ffn = 32;
  TrainOptions opts;
  opts.epochs = 5;
  opts.batch_size = 2;
  opts.seed = 3;
  auto r1 = train_oov(pairs, a, cfg, opts);
  auto r2 = train_oov(pairs, a, cfg, opts);
  REQUIRE(r1.log.size() == r2.log.size());
  for (size_t i = 0; i < r1.log.size(); ++i) {
    CHECK(r1.log[i].train_loss == r2.log[i].train_loss);
  }
  // Identical parameters bit for bit.
  auto p1 = r1.model->net().params().params();
  auto p2 = r2.model->net().params().params();
  for (size_t i = 0; i < p1.size(); ++i) {
    CHECK(p1[i]->value.data == p2[i]->value.data);
  }
}

TEST_CASE("beam search score is monotone in width and exhaustive in the limit") {
  Alphabet a = tiny_alphabet();
  OovConfig cfg;
  cfg.d_model = 16;
  cfg.heads = 2;
  cfg.enc_layers = 1;
  cfg.dec_layers = 1;
  cfg.ffn = 32;
  cfg.dropout = 0.0;
  cfg.max_pron_len = 3;
  std::vector<TrainPair> pairs = {{U"ab", "ko"}, {U"ba", "oe"}, {U"bb", "k"}};
  TrainOptions opts;
  opts.epochs = 30;
  opts.batch_size = 4;
  opts.seed = 5;
  auto res = train_oov(pairs, a, cfg, opts);
  const OovModel& model = *res.model;

  // Exhaustive enumeration over all target sequences of length <= 3.
  auto exhaustive_best = [&](const std::u32string& word) {
    const std::vector<char> phonemes = {'e', 'o', 'k', 'y'};
    double best = -1e300;
    PhonemeSeq best_seq;
    std::function<void(PhonemeSeq&)> rec = [&](PhonemeSeq& cur) {
      const double s = model.score(word, cur);
      if (s > best) {
        best = s;
        best_seq = cur;
      }
      if (cur.size() == 3) return;
      for (char p : phonemes) {
        cur.push_back(p);
        rec(cur);
        cur.pop_back();
      }
    };
    PhonemeSeq empty;
    rec(empty);
    return std::pair<double, PhonemeSeq>(best, best_seq);
  };

  for (const std::u32string& word : {std::u32string(U"ab"),
                                     std::u32string(U"bba"),
                                     std::u32string(U"a")}) {
    auto [best_score, best_seq] = exhaustive_best(word);
    double prev = -1e300;
    for (int beam : {1, 2, 4, 8}) {
      OovPrediction p = model.predict(word, beam);
      CHECK(p.log_prob >= prev - 1e-12);       // widening never hurts
      CHECK(p.log_prob <= best_score + 1e-9);  // never beats exhaustive
      prev = p.log_prob;
      // Same word, same beam: identical output.
      CHECK(model.predict(word, beam).pron == p.pron);
    }
    // A beam covering every length-3 prefix set is exhaustive: 4^3 = 64.
    OovPrediction full = model.predict(word, 64);
    CHECK(full.log_prob == doctest::Approx(best_score).epsilon(1e-9));
    CHECK(full.pron == best_seq);
  }
}

TEST_CASE("homograph model trains, snaps, and round-trips its checkpoint") {
  Alphabet a = tiny_alphabet();
  ContextConfig cfg;
  cfg.char_embed = 8;
  cfg.word_hidden = 12;
  cfg.cross_hidden = 12;
  cfg.decoder_hidden = 16;
  cfg.phoneme_embed = 8;
  cfg.dropout = 0.0;
  TrainOptions opts;
  opts.epochs = 3;
  opts.batch_size = 4;
  opts.seed = 17;

  std::vector<WindowSample> samples;
  for (const char* ctx : {"ea", "fa", "gb", "ha"}) {
    samples.push_back({window_of({"<PAD>", "ba", "ab", ctx, "<PAD>"}), "ko"});
  }
  for (const char* ctx : {"aa", "bb", "cc", "dd"}) {
    samples.push_back({window_of({"<PAD>", "ba", "ab", ctx, "<PAD>"}), "ke"});
  }
  samples.push_back({window_of({"<PAD>", "<PAD>", "ba", "ab", "<PAD>"}), "oy"});

  auto res = train_homograph(samples, a, cfg, opts);
  auto res2 = train_homograph(samples, a, cfg, opts);
  for (size_t i = 0; i < res.log.size(); ++i) {
    CHECK(res.log[i].train_loss == res2.log[i].train_loss);  // seeded
  }

  // Prediction always lands in the allowed set, trained or not.
  const std::vector<PhonemeSeq> allowed = {"ko", "ke"};
  Rng tie(1);
  for (const WindowSample& s : samples) {
    PhonemeSeq out = res.model->predict(s.window, allowed, tie);
    CHECK((out == "ko" || out == "ke"));
  }
  CHECK_THROWS_AS(res.model->predict(samples[0].window, {}, tie), DataError);

  const std::string path =
      (std::filesystem::temp_directory_path() / "g2p_homo_test.ckpt").string();
  res.model->save(path);
  HomographModel back = HomographModel::load(path, a);
  CHECK(back.predict_raw(samples[0].window) ==
        res.model->predict_raw(samples[0].window));
  std::filesystem::remove(path);

  // Zero homograph middles is degenerate but legal.
  std::vector<WindowSample> plain = {
      {window_of({"<PAD>", "<PAD>", "ba", "<PAD>", "<PAD>"}), "oy"}};
  CHECK_NOTHROW(train_homograph(plain, a, cfg, opts));
}

TEST_CASE("ezafe heads: probabilities, degenerate sets, unknown words") {
  Alphabet a = tiny_alphabet();
  ContextConfig cfg;
  cfg.char_embed = 8;
  cfg.word_hidden = 10;
  cfg.cross_hidden = 10;
  cfg.word_embed = 12;
  cfg.dropout = 0.0;
  TrainOptions opts;
  opts.epochs = 2;
  opts.batch_size = 4;
  opts.seed = 23;

  std::vector<LabeledWindow> rows = {
      {window_of({"<PAD>", "ba", "ab", "ea", "<PAD>"}), 1},
      {window_of({"<PAD>", "ba", "ab", "aa", "<PAD>"}), 0},
      {window_of({"ba", "ab", "ea", "aa", "<PAD>"}), 0},
      {window_of({"<PAD>", "<PAD>", "ab", "ea", "ba"}), 1},
  };
  auto r1 = train_ezafe_i(rows, a, cfg, opts);
  CHECK_FALSE(r1.single_class);
  EzafePrediction p = r1.model->predict(rows[0].window);
  CHECK((p.label == 0 || p.label == 1));
  CHECK(p.prob_ezafe >= 0.0);
  CHECK(p.prob_ezafe <= 1.0);

  // All-PAD context still yields a valid decision.
  EzafePrediction lonely = r1.model->predict(
      window_of({"<PAD>", "<PAD>", "ab", "<PAD>", "<PAD>"}));
  CHECK((lonely.label == 0 || lonely.label == 1));

  std::vector<LabeledWindow> one_class = {rows[1], rows[2]};
  auto r2 = train_ezafe_i(one_class, a, cfg, opts);
  CHECK(r2.single_class);

  auto r3 = train_ezafe_ii(rows, a, cfg, opts);
  CHECK(r3.model->vocab().size() >= 3);
  // Unknown words fall to the UNK row without crashing.
  EzafePrediction unk = r3.model->predict(
      window_of({"<PAD>", "hh", "gg", "ff", "<PAD>"}));
  CHECK((unk.label == 0 || unk.label == 1));

  // Checkpoint round trip for model II keeps the vocabulary.
  const std::string path =
      (std::filesystem::temp_directory_path() / "g2p_ez2_test.ckpt").string();
  r3.model->save(path);
  EzafeModelII back = EzafeModelII::load(path, a);
  CHECK(back.vocab() == r3.model->vocab());
  CHECK(back.predict(rows[0].window).label ==
        r3.model->predict(rows[0].window).label);
  std::filesystem::remove(path);
}

TEST_CASE("ngram encoder is sensitive to context word order") {
  Alphabet a = tiny_alphabet();
  ContextConfig cfg;
  cfg.char_embed = 8;
  cfg.word_hidden = 10;
  cfg.cross_hidden = 10;
  cfg.dropout = 0.0;
  nn::ParamStore ps;
  Rng rng(31);
  NGramEncoder enc(ps, a, cfg, rng);
  nn::Graph g;
  auto w1 = window_of({"aa", "bb", "cc", "dd", "ee"});
  auto w2 = window_of({"bb", "aa", "cc", "dd", "ee"});  // swapped context
  auto e1 = enc.encode(g, {w1});
  auto e2 = enc.encode(g, {w2});
  bool differs = false;
  const auto& v1 = g.value(e1.cross_middle).data;
  const auto& v2 = g.value(e2.cross_middle).data;
  for (size_t i = 0; i < v1.size(); ++i) differs = differs || v1[i] != v2[i];
  CHECK(differs);
  // Target slot must never be a PAD sentinel.
  CHECK_THROWS_AS(
      enc.encode(g, {window_of({"aa", "bb", "<PAD>", "dd", "ee"})}), DataError);
}

TEST_CASE("bordered formatting matches the documented layout") {
  auto w = window_of({"گفت", "شیرخشک", "غذا", "نوزاد", "است"});
  CHECK(utf8::encode(format_bordered(w)) == "گفت#شیرخشک(غذا)نوزاد#است");
  // Leading PADs become empty segments; still exactly one parenthesized
  // middle.
  auto lead = window_of({"<PAD>", "<PAD>", "غذا", "نوزاد", "است"});
  const std::string s = utf8::encode(format_bordered(lead));
  CHECK(s == "#(غذا)نوزاد#است");
  CHECK(std::count(s.begin(), s.end(), '(') == 1);
  CHECK(std::count(s.begin(), s.end(), ')') == 1);
  // Round trip.
  CHECK(parse_bordered(format_bordered(w)) == w);
  CHECK(parse_bordered(format_bordered(lead)) == lead);
  // border_all layout parses back to the same window.
  CHECK(parse_bordered(format_bordered(w, /*border_all=*/true)) == w);
  // Reserved symbols inside words are an error.
  auto bad = window_of({"گفت", "شیر#خشک", "غذا", "نوزاد", "است"});
  CHECK_THROWS_AS(format_bordered(bad), DataError);
  CHECK_THROWS_AS(parse_bordered(utf8::decode("a#b(c)d")), DataError);
  CHECK_THROWS_AS(parse_bordered(utf8::decode("a#b c d#e")), DataError);
}

TEST_CASE("bordered round trip on randomized windows") {
  Rng rng(37);
  const char* vocab[] = {"aa", "ab", "ba", "fgh", "cde", "h"};
  for (int iter = 0; iter < 300; ++iter) {
    std::vector<std::string> words(5);
    for (int k = 0; k < 5; ++k) {
      if (k != 2 && rng.below(4) == 0) {
        words[k] = "<PAD>";
      } else {
        words[k] = vocab[rng.below(6)];
      }
    }
    Window5 w = window_of(words);
    const bool all = rng.below(2) == 0;
    CHECK(parse_bordered(format_bordered(w, all)) == w);
  }
}

TEST_CASE("e2e models produce valid untrained output and train a step") {
  Alphabet a = tiny_alphabet();
  E2eConfig cfg;
  cfg.d_model = 16;
  cfg.heads = 2;
  cfg.enc_layers = 1;
  cfg.dec_layers = 1;
  cfg.ffn = 32;
  cfg.dropout = 0.0;
  cfg.max_pron_len = 6;
  auto w = window_of({"aa", "ba", "ab", "bb", "aa"});
  E2eTransformer model(a, cfg, 41);
  E2ePrediction p = model.predict(w);
  CHECK(a.valid_pron(p.pron));  // untrained but well-formed
  CHECK(model.predict(w).pron == p.pron);

  ContextConfig gcfg;
  gcfg.char_embed = 8;
  gcfg.word_hidden = 10;
  gcfg.cross_hidden = 10;
  gcfg.decoder_hidden = 12;
  gcfg.phoneme_embed = 8;
  gcfg.dropout = 0.0;
  TrainOptions opts;
  opts.epochs = 2;
  opts.batch_size = 2;
  opts.seed = 43;
  std::vector<WindowSample> samples = {
      {w, "koye"},
      {window_of({"<PAD>", "ba", "ab", "bb", "aa"}), "ko"}};
  auto tr = train_e2e(samples, a, E2eArch::kTransformer, cfg, gcfg, opts);
  CHECK(tr.transformer != nullptr);
  CHECK(a.valid_pron(tr.predict(w).pron));
  auto gr = train_e2e(samples, a, E2eArch::kGruAttention, cfg, gcfg, opts);
  CHECK(gr.gru != nullptr);
  CHECK(a.valid_pron(gr.predict(w).pron));

  // Checkpoint round trips.
  const std::string path =
      (std::filesystem::temp_directory_path() / "g2p_e2e_test.ckpt").string();
  tr.transformer->save(path);
  E2eTransformer back = E2eTransformer::load(path, a);
  CHECK(back.predict(w).pron == tr.predict(w).pron);
  gr.gru->save(path);
  E2eGru back2 = E2eGru::load(path, a);
  CHECK(back2.predict(w).pron == gr.predict(w).pron);
  std::filesystem::remove(path);
}

TEST_CASE("window TSV round trip") {
  std::vector<WindowSample> samples = {
      {window_of({"<PAD>", "ba", "ab", "ea", "<PAD>"}), "ko"},
      {window_of({"aa", "bb", "cc", "dd", "ee"}), "keo"},
  };
  const std::string text = serialize_window_samples(samples);
  auto back = parse_window_samples(text);
  REQUIRE(back.size() == 2);
  CHECK(back[0].window == samples[0].window);
  CHECK(back[0].target == "ko");
  CHECK(serialize_window_samples(back) == text);

  std::vector<LabeledWindow> rows = {
      {window_of({"<PAD>", "ba", "ab", "ea", "<PAD>"}), 1}};
  auto lab = parse_labeled_windows(serialize_labeled_windows(rows));
  CHECK(lab[0].label == 1);
  CHECK(lab[0].window == rows[0].window);
  CHECK_THROWS_AS(parse_labeled_windows("a\tb\tc\td\te\t2\n"), ParseError);
  CHECK_THROWS_AS(parse_window_samples("a\tb\t<PAD>\td\te\tko\n"), ParseError);
}
