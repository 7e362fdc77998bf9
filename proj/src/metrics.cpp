#include "g2p/metrics.hpp"

#include <algorithm>

#include "g2p/edit_distance.hpp"
#include "g2p/errors.hpp"

namespace g2p {
namespace metrics {

WordAccuracy word_accuracy(const std::vector<PhonemeSeq>& hyp,
                           const std::vector<PhonemeSeq>& ref) {
  if (hyp.size() != ref.size()) {
    throw DataError("word_accuracy: got " + std::to_string(hyp.size()) +
                    " hypotheses for " + std::to_string(ref.size()) +
                    " references");
  }
  WordAccuracy acc;
  acc.total = static_cast<int64_t>(ref.size());
  for (size_t i = 0; i < ref.size(); ++i) {
    if (hyp[i] == ref[i]) ++acc.correct;
  }
  return acc;
}

EzafeAccuracy ezafe_accuracy(const std::vector<int>& hyp,
                             const std::vector<int>& ref) {
  if (hyp.size() != ref.size()) {
    throw DataError("ezafe_accuracy: got " + std::to_string(hyp.size()) +
                    " hypotheses for " + std::to_string(ref.size()) +
                    " references");
  }
  EzafeAccuracy acc;
  acc.total = static_cast<int64_t>(ref.size());
  for (size_t i = 0; i < ref.size(); ++i) {
    if (hyp[i] == ref[i]) {
      ++acc.correct;
      if (ref[i] == 1) {
        ++acc.true_positive;
      } else {
        ++acc.true_negative;
      }
    } else if (hyp[i] == 1) {
      ++acc.false_positive;
    } else {
      ++acc.false_negative;
    }
  }
  return acc;
}

HomographEvalReport homograph_score(
    const std::vector<HomographSample>& samples,
    const std::unordered_map<std::string, std::vector<PhonemeSeq>>& inventory) {
  // Tally per homograph in first-appearance order.
  std::vector<std::string> order;
  std::unordered_map<std::string, std::unordered_map<std::string, PronTally>>
      tallies;
  HomographEvalReport report;
  report.accuracy.total = static_cast<int64_t>(samples.size());
  for (const HomographSample& s : samples) {
    auto inv = inventory.find(s.homograph);
    if (inv == inventory.end()) {
      throw DataError("homograph '" + s.homograph + "' has no inventory");
    }
    if (std::find(inv->second.begin(), inv->second.end(), s.gold) ==
        inv->second.end()) {
      throw DataError("gold pronunciation '" + s.gold +
                      "' is outside the inventory of '" + s.homograph + "'");
    }
    auto [it, inserted] = tallies.try_emplace(s.homograph);
    if (inserted) order.push_back(s.homograph);
    PronTally& t = it->second[s.gold];
    t.pron = s.gold;
    ++t.appearances;
    if (s.hyp == s.gold) {
      ++t.correct_calls;
      ++report.accuracy.correct;
    }
  }

  double total = 0;
  for (const std::string& word : order) {
    const auto& inv = inventory.at(word);
    HomographEntry entry;
    entry.homograph = word;
    double sum = 0;
    for (const PhonemeSeq& pron : inv) {
      PronTally t;
      t.pron = pron;
      auto it = tallies[word].find(pron);
      if (it != tallies[word].end()) t = it->second;
      if (t.appearances > 0) {
        sum += static_cast<double>(t.correct_calls) /
               static_cast<double>(t.appearances);
        ++entry.n_effective;
      } else {
        ++entry.zero_appearance_prons;
      }
      entry.prons.push_back(t);
    }
    entry.s_score = entry.n_effective == 0 ? 0.0 : sum / entry.n_effective;
    total += entry.s_score;
    report.entries.push_back(std::move(entry));
  }
  report.unique_homographs = static_cast<int>(order.size());
  report.score =
      report.unique_homographs == 0 ? 0.0 : total / report.unique_homographs;
  return report;
}

nlohmann::json HomographEvalReport::to_jsonl() const {
  nlohmann::json lines = nlohmann::json::array();
  for (const HomographEntry& e : entries) {
    nlohmann::json prons = nlohmann::json::array();
    for (const PronTally& t : e.prons) {
      prons.push_back({{"pron", t.pron},
                       {"appearances", t.appearances},
                       {"correct_calls", t.correct_calls}});
    }
    lines.push_back({{"record", "homograph"},
                     {"homograph", e.homograph},
                     {"prons", prons},
                     {"n_effective", e.n_effective},
                     {"zero_appearance_prons", e.zero_appearance_prons},
                     {"s_score", e.s_score}});
  }
  lines.push_back({{"record", "summary"},
                   {"unique_homographs", unique_homographs},
                   {"homograph_score", score},
                   {"accuracy", accuracy.fraction()},
                   {"samples", accuracy.total}});
  return lines;
}

std::string HomographEvalReport::to_jsonl_string() const {
  std::string out;
  for (const auto& line : to_jsonl()) {
    out += line.dump() + "\n";
  }
  return out;
}

double phoneme_error_rate(const std::vector<PhonemeSeq>& hyp,
                          const std::vector<PhonemeSeq>& ref) {
  if (hyp.size() != ref.size()) {
    throw DataError("phoneme_error_rate: length mismatch");
  }
  int64_t edits = 0, symbols = 0;
  for (size_t i = 0; i < ref.size(); ++i) {
    edits += edit_distance(hyp[i], ref[i]);
    symbols += static_cast<int64_t>(ref[i].size());
  }
  return symbols == 0 ? 0.0 : static_cast<double>(edits) / symbols;
}

}  // namespace metrics
}  // namespace g2p
