#pragma once

#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "g2p/manifest.hpp"

namespace g2p {
namespace cli {

// Exit codes shared by every subcommand.
constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kDataError = 2;
constexpr int kModelError = 3;
constexpr int kVerificationFailure = 4;

int run_synth(const std::string& spec_path, const std::string& out_dir);
int run_train(const std::string& module, const Manifest& m);
int run_convert(const Manifest& m, std::istream& in, std::ostream& out);
int run_eval(const Manifest& m, const std::string& corpus_path,
             const std::string& out_prefix, std::ostream& out);
int run_gradcheck(std::ostream& out);

// Loads a manifest and applies later "key=value" overrides in order.
Manifest manifest_with_overrides(const std::string& path,
                                 const std::vector<std::string>& overrides);

// Maps library exceptions onto exit codes around a command body.
int guarded(const std::function<int()>& body);

}  // namespace cli
}  // namespace g2p
