#include "g2p/cli/commands.hpp"

#include <functional>
#include <iomanip>
#include <thread>

#include "g2p/io_util.hpp"
#include "g2p/nn/gradcheck_suite.hpp"
#include "g2p/tasks.hpp"

namespace g2p {
namespace cli {

Manifest manifest_with_overrides(const std::string& path,
                                 const std::vector<std::string>& overrides) {
  Manifest m = Manifest::load(path);
  for (const std::string& o : overrides) {
    const size_t eq = o.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw DataError("override must be key=value, got '" + o + "'");
    }
    m.set(o.substr(0, eq), o.substr(eq + 1));
  }
  return m;
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const CheckpointError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return kModelError;
  } catch (const G2pError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
}

int run_synth(const std::string& spec_path, const std::string& out_dir) {
  synthlang::SynthSpec spec;
  if (!spec_path.empty()) {
    spec = synthlang::SynthSpec::from_kv(Manifest::load(spec_path).kv());
  }
  std::cerr << "synth seed=" << spec.seed << " vocab=" << spec.vocab_size
            << " sentences=" << spec.sentence_count
            << " homographs=" << spec.homograph_count << "\n";
  synthlang::GeneratedFiles files = synthlang::generate_to_dir(spec, out_dir);
  std::cout << files.alphabet_path << "\n"
            << files.lexicon_path << "\n"
            << files.corpus_path << "\n"
            << files.exceptions_path << "\n"
            << files.freq_path << "\n";
  return kOk;
}

int run_train(const std::string& module, const Manifest& m) {
  tasks::train_module(module, m);
  return kOk;
}

namespace {

std::string convert_line_tsv(const std::vector<WordResult>& results) {
  std::string out;
  for (const WordResult& r : results) {
    out += r.token.utf8() + "\t" + r.pron + "\t" + route_name(r.route) + "\t" +
           std::to_string(r.ezafe) + "\n";
  }
  return out;
}

}  // namespace

int run_convert(const Manifest& m, std::istream& in, std::ostream& out) {
  auto system = G2pSystem::from_manifest(m);
  std::cerr << "convert seed=" << system->flags().seed
            << " beam=" << system->flags().beam << " ezafe_model="
            << (system->flags().ezafe_model == EzafeChoice::kModelI ? "i" : "ii")
            << " skiplist=" << (system->flags().use_skiplist ? "on" : "off")
            << "\n";

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);

  // Line-sharded conversion; output order always matches input order.
  const int workers = std::max(
      1, std::min<int>(system->flags().threads, static_cast<int>(lines.size())));
  std::vector<std::string> outputs(lines.size());
  if (workers <= 1) {
    for (size_t i = 0; i < lines.size(); ++i) {
      outputs[i] = convert_line_tsv(system->convert(lines[i]));
    }
  } else {
    std::atomic<size_t> next{0};
    auto work = [&]() {
      while (true) {
        const size_t i = next.fetch_add(1);
        if (i >= lines.size()) break;
        outputs[i] = convert_line_tsv(system->convert(lines[i]));
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const std::string& o : outputs) out << o;

  const auto& st = system->stats();
  const uint64_t dict_n = st.dict_words.load();
  const uint64_t model_n = st.homograph_words.load() + st.oov_words.load();
  std::cerr << "words: dict=" << dict_n << " homograph="
            << st.homograph_words.load() << " oov=" << st.oov_words.load()
            << " punct=" << st.punct_tokens.load()
            << " ezafe_model_calls=" << st.ezafe_model_calls.load()
            << " skiplist_skips=" << st.skiplist_skips.load() << "\n";
  if (dict_n > 0 && model_n > 0 && st.dict_ns.load() > 0) {
    const double dict_per = static_cast<double>(st.dict_ns.load()) / dict_n;
    const double model_per = static_cast<double>(st.model_ns.load()) / model_n;
    std::cerr << std::fixed << std::setprecision(1)
              << "throughput: dict-route " << dict_per
              << " ns/word, model-route " << model_per
              << " ns/word (x" << model_per / dict_per << ")\n";
  }
  if (m.has("oov_log")) {
    const int flushed = system->oov_log().flush(m.get("oov_log"));
    std::cerr << "oov log: " << flushed << " new words -> " << m.get("oov_log")
              << "\n";
  }
  return kOk;
}

int run_eval(const Manifest& m, const std::string& corpus_path,
             const std::string& out_prefix, std::ostream& out) {
  auto system = G2pSystem::from_manifest(m);
  auto lexicon = load_lexicon(m.get("lexicon"));
  auto corpus = load_corpus(corpus_path);
  EzafeLabelReport labels =
      derive_ezafe_labels(corpus, lexicon, system->alphabet());
  std::cerr << "eval sentences=" << corpus.size()
            << " seed=" << system->flags().seed << "\n";
  tasks::EvalResult res = tasks::evaluate_system(
      *system, corpus, labels, system->dicts().homograph_dict);
  if (!out_prefix.empty()) {
    write_file_atomic(out_prefix + "words.tsv", res.words_tsv);
    write_file_atomic(out_prefix + "report.jsonl", res.report_jsonl());
    std::cerr << "wrote " << out_prefix << "words.tsv and " << out_prefix
              << "report.jsonl\n";
  }
  out << res.summary().dump(2) << "\n";
  return kOk;
}

int run_gradcheck(std::ostream& out) {
  nn::SuiteResult res = nn::run_gradcheck_suite(out);
  return res.ok ? kOk : kVerificationFailure;
}

}  // namespace cli
}  // namespace g2p
