#pragma once

#include <functional>
#include <string>
#include <vector>

#include "g2p/nn/graph.hpp"

namespace g2p {
namespace nn {

struct GradCheckEntry {
  std::string param;
  double max_rel_error = 0.0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::vector<GradCheckEntry> entries;

  bool within(double tolerance) const { return max_rel_error < tolerance; }
};

// Compares reverse-mode gradients against central finite differences for
// every element of every parameter in `store`. The builder must construct a
// scalar loss from the store deterministically (no dropout).
GradCheckReport grad_check(
    ParamStoreT<double>& store,
    const std::function<Var(GraphT<double>&)>& build_loss, double epsilon);

}  // namespace nn
}  // namespace g2p
