#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "g2p/cli/commands.hpp"
#include "g2p/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Multi-module grapheme-to-phoneme engine"};
  app.require_subcommand(1);

  std::string spec_path, out_dir;
  auto* synth = app.add_subcommand(
      "synth", "Generate a synthetic language (lexicon, corpus, exceptions)");
  synth->add_option("--spec", spec_path, "Synthetic language spec file");
  synth->add_option("--out", out_dir, "Output directory")->required();

  std::string module, manifest_path, input_path, output_path, corpus_path,
      out_prefix;
  std::vector<std::string> overrides;
  auto* train = app.add_subcommand("train", "Train one module");
  train->add_option("--module", module, "Module to train")
      ->required()
      ->check(CLI::IsMember({"oov", "homograph", "ezafe-i", "ezafe-ii",
                             "e2e-transformer", "e2e-gru"}));
  train->add_option("--manifest", manifest_path, "Manifest file")->required();
  train->add_option("--set", overrides, "Manifest override key=value");

  auto* convert = app.add_subcommand("convert", "Convert text to phonemes");
  convert->add_option("--manifest", manifest_path, "Manifest file")->required();
  convert->add_option("--input", input_path, "Input text file (default stdin)");
  convert->add_option("--output", output_path, "Output TSV (default stdout)");
  convert->add_option("--set", overrides, "Manifest override key=value");

  auto* eval = app.add_subcommand("eval", "Evaluate on a test corpus");
  eval->add_option("--manifest", manifest_path, "Manifest file")->required();
  eval->add_option("--corpus", corpus_path, "Test corpus TSV")->required();
  eval->add_option("--out-prefix", out_prefix,
                   "Prefix for words.tsv and report.jsonl outputs");
  eval->add_option("--set", overrides, "Manifest override key=value");

  app.add_subcommand("gradcheck",
                     "Check every layer against finite differences");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // help text, success
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return g2p::cli::kUsage;
  }

  using namespace g2p::cli;
  return guarded([&]() -> int {
    if (app.got_subcommand("synth")) {
      return run_synth(spec_path, out_dir);
    }
    if (app.got_subcommand("train")) {
      return run_train(module, manifest_with_overrides(manifest_path, overrides));
    }
    if (app.got_subcommand("convert")) {
      g2p::Manifest m = manifest_with_overrides(manifest_path, overrides);
      std::ifstream fin;
      if (!input_path.empty()) {
        fin.open(input_path);
        if (!fin) throw g2p::DataError("cannot open input: " + input_path);
      }
      std::ofstream fout;
      if (!output_path.empty()) {
        fout.open(output_path);
        if (!fout) throw g2p::DataError("cannot open output: " + output_path);
      }
      return run_convert(m, input_path.empty() ? std::cin : fin,
                         output_path.empty() ? std::cout : fout);
    }
    if (app.got_subcommand("eval")) {
      return run_eval(manifest_with_overrides(manifest_path, overrides),
                      corpus_path, out_prefix, std::cout);
    }
    if (app.got_subcommand("gradcheck")) {
      return run_gradcheck(std::cout);
    }
    return kUsage;
  });
}
