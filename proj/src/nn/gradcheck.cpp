#include "g2p/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace g2p {
namespace nn {

namespace {

double eval_loss(const std::function<Var(GraphT<double>&)>& build_loss) {
  GraphT<double> g(/*train_mode=*/false, nullptr, /*check_finite=*/true);
  Var loss = build_loss(g);
  return g.value(loss).data[0];
}

}  // namespace

GradCheckReport grad_check(
    ParamStoreT<double>& store,
    const std::function<Var(GraphT<double>&)>& build_loss, double epsilon) {
  store.zero_grads();
  {
    GraphT<double> g(false, nullptr, true);
    Var loss = build_loss(g);
    g.backward(loss);
  }

  GradCheckReport report;
  for (auto* p : store.params()) {
    GradCheckEntry entry;
    entry.param = p->name;
    for (size_t k = 0; k < p->value.data.size(); ++k) {
      const double orig = p->value.data[k];
      p->value.data[k] = orig + epsilon;
      const double up = eval_loss(build_loss);
      p->value.data[k] = orig - epsilon;
      const double down = eval_loss(build_loss);
      p->value.data[k] = orig;
      const double numeric = (up - down) / (2 * epsilon);
      const double analytic = p->grad.data[k];
      // Floor the denominator: gradients near zero sit at the finite
      // difference noise floor and are meaningful only in absolute terms.
      const double denom =
          std::max(std::abs(analytic) + std::abs(numeric), 1e-6);
      const double rel = std::abs(analytic - numeric) / denom;
      if (rel > entry.max_rel_error) {
        entry.max_rel_error = rel;
        entry.worst_analytic = analytic;
        entry.worst_numeric = numeric;
      }
    }
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace nn
}  // namespace g2p
