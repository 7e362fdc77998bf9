#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace g2p {
namespace nn {

struct SuiteLine {
  std::string layer;
  int shapes = 0;
  double worst = 0.0;
  double tolerance = 0.0;
  bool ok = false;
};

struct SuiteResult {
  std::vector<SuiteLine> lines;
  bool ok = true;
  double seconds = 0.0;
};

// Checks every differentiable layer against central finite differences in
// double precision over `shapes_per_layer` random shapes each: linear,
// embedding, GRU cell, bidirectional GRU, attention, transformer block and
// cross-entropy. Prints one line per layer.
SuiteResult run_gradcheck_suite(std::ostream& out, int shapes_per_layer = 20,
                                uint64_t seed = 1234);

}  // namespace nn
}  // namespace g2p
