#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "g2p/cli/commands.hpp"
#include "g2p/edit_distance.hpp"
#include "g2p/metrics.hpp"
#include "g2p/nn/gradcheck_suite.hpp"
#include "g2p/pipeline.hpp"
#include "g2p/synthlang.hpp"
#include "g2p/tasks.hpp"
#include "g2p/utf8.hpp"

namespace py = pybind11;
using namespace g2p;

namespace {

py::dict word_result_dict(const WordResult& r) {
  py::dict d;
  d["word"] = r.token.utf8();
  d["pron"] = r.pron;
  d["pron_base"] = r.pron_base;
  d["route"] = route_name(r.route);
  d["ezafe"] = r.ezafe;
  d["snap_distance"] = r.snap_distance;
  d["truncated"] = r.truncated;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-module grapheme-to-phoneme engine";

  // Base first: translators run newest-first, so derived types must come
  // after their base to win the match.
  auto base = py::register_exception<G2pError>(m, "G2pDataError");
  py::register_exception<CheckpointError>(m, "G2pCheckpointError", base.ptr());
  py::register_exception<ParseError>(m, "G2pParseError", base.ptr());

  py::class_<Alphabet>(m, "Alphabet")
      .def_static("load", &Alphabet::load, py::arg("path"))
      .def_static("parse", &Alphabet::parse, py::arg("contents"))
      .def("serialize", &Alphabet::serialize)
      .def("fingerprint", &Alphabet::fingerprint)
      .def("is_vowel", &Alphabet::is_vowel, py::arg("phoneme"))
      .def("valid_pron", &Alphabet::valid_pron, py::arg("pron"))
      .def_property_readonly("phonemes",
                             [](const Alphabet& a) {
                               std::vector<std::string> out;
                               for (char p : a.phonemes())
                                 out.emplace_back(1, p);
                               return out;
                             })
      .def_property_readonly("graphemes", [](const Alphabet& a) {
        std::vector<std::string> out;
        for (char32_t c : a.graphemes()) out.push_back(utf8::encode(c));
        return out;
      });

  py::class_<NormTable>(m, "NormTable")
      .def(py::init<>())
      .def_static("load", &NormTable::load, py::arg("path"))
      .def_static("parse", &NormTable::parse, py::arg("contents"));

  m.def(
      "normalize",
      [](const std::string& raw, const Alphabet& a, const NormTable& t) {
        NormalizeResult r = normalize_utf8(raw, a, t);
        return py::make_tuple(utf8::encode(r.text), r.unk_count);
      },
      py::arg("raw"), py::arg("alphabet"), py::arg("table"),
      "Returns (normalized_text, unk_count).");

  m.def(
      "tokenize",
      [](const std::string& normalized, const Alphabet& a) {
        std::vector<std::pair<std::string, bool>> out;
        for (const Token& t : tokenize(utf8::decode(normalized), a)) {
          out.emplace_back(t.utf8(), t.is_punct);
        }
        return out;
      },
      py::arg("normalized"), py::arg("alphabet"),
      "Returns a list of (token, is_punct).");

  m.def(
      "edit_distance",
      [](const std::string& a, const std::string& b) {
        return edit_distance(utf8::decode(a), utf8::decode(b));
      },
      py::arg("a"), py::arg("b"), "Levenshtein distance over code points.");

  m.def(
      "apply_ezafe",
      [](const std::string& pron, int flag, const Alphabet& a) {
        return apply_ezafe(pron, flag, a);
      },
      py::arg("pron"), py::arg("flag"), py::arg("alphabet"));

  m.def(
      "parse_lexicon",
      [](const std::string& contents) {
        py::list out;
        for (const LexiconEntry& e : parse_lexicon(contents)) {
          py::dict d;
          d["headword"] = e.headword;
          py::list variants;
          for (const PronVariant& v : e.variants) {
            variants.append(py::make_tuple(v.tag, v.pron, v.is_gen));
          }
          d["variants"] = variants;
          out.append(d);
        }
        return out;
      },
      py::arg("contents"));

  m.def("word_accuracy", [](const std::vector<PhonemeSeq>& hyp,
                            const std::vector<PhonemeSeq>& ref) {
    return metrics::word_accuracy(hyp, ref).fraction();
  });

  m.def("ezafe_accuracy",
        [](const std::vector<int>& hyp, const std::vector<int>& ref) {
          metrics::EzafeAccuracy acc = metrics::ezafe_accuracy(hyp, ref);
          py::dict d;
          d["accuracy"] = acc.fraction();
          d["tp"] = acc.true_positive;
          d["fp"] = acc.false_positive;
          d["tn"] = acc.true_negative;
          d["fn"] = acc.false_negative;
          return d;
        });

  m.def(
      "homograph_score",
      [](const std::vector<std::tuple<std::string, std::string, std::string>>&
             samples,
         const std::unordered_map<std::string, std::vector<PhonemeSeq>>& inv) {
        std::vector<metrics::HomographSample> ss;
        for (const auto& [w, gold, hyp] : samples) ss.push_back({w, gold, hyp});
        metrics::HomographEvalReport rep = metrics::homograph_score(ss, inv);
        py::dict d;
        d["score"] = rep.score;
        d["accuracy"] = rep.accuracy.fraction();
        d["unique_homographs"] = rep.unique_homographs;
        d["jsonl"] = rep.to_jsonl_string();
        return d;
      },
      py::arg("samples"), py::arg("inventory"),
      "samples: list of (homograph, gold, hyp) triples.");

  m.def(
      "synth_generate",
      [](const std::string& out_dir, const py::dict& overrides) {
        std::map<std::string, std::string> kv;
        for (const auto& item : overrides) {
          kv[py::str(item.first)] = py::str(item.second);
        }
        synthlang::SynthSpec spec = synthlang::SynthSpec::from_kv(kv);
        synthlang::GeneratedFiles f = synthlang::generate_to_dir(spec, out_dir);
        py::dict d;
        d["alphabet"] = f.alphabet_path;
        d["lexicon"] = f.lexicon_path;
        d["corpus"] = f.corpus_path;
        d["exceptions"] = f.exceptions_path;
        d["freq"] = f.freq_path;
        return d;
      },
      py::arg("out_dir"), py::arg("spec") = py::dict());

  m.def(
      "train_module",
      [](const std::string& module, const std::string& manifest_path,
         const std::map<std::string, std::string>& overrides) {
        Manifest mf = Manifest::load(manifest_path);
        for (const auto& [k, v] : overrides) mf.set(k, v);
        return tasks::train_module(module, mf);
      },
      py::arg("module"), py::arg("manifest"),
      py::arg("overrides") = std::map<std::string, std::string>(),
      "Trains one module and returns the checkpoint path.");

  m.def("run_gradcheck", []() {
    std::ostringstream ss;
    nn::SuiteResult res = nn::run_gradcheck_suite(ss);
    return py::make_tuple(res.ok, ss.str());
  });

  py::class_<G2pSystem>(m, "G2pSystem")
      .def_static(
          "from_manifest",
          [](const std::string& path,
             const std::map<std::string, std::string>& overrides) {
            Manifest mf = Manifest::load(path);
            for (const auto& [k, v] : overrides) mf.set(k, v);
            return G2pSystem::from_manifest(mf);
          },
          py::arg("path"),
          py::arg("overrides") = std::map<std::string, std::string>())
      .def(
          "convert",
          [](G2pSystem& sys, const std::string& raw) {
            py::list out;
            for (const WordResult& r : sys.convert(raw)) {
              out.append(word_result_dict(r));
            }
            return out;
          },
          py::arg("text"))
      .def("flush_oov_log",
           [](G2pSystem& sys, const std::string& path) {
             return sys.oov_log().flush(path);
           })
      .def_property_readonly("homographs", [](const G2pSystem& sys) {
        return sys.dicts().homograph_dict;
      });
}
