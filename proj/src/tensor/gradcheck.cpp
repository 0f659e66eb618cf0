#include "gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace s2gsl {

double GradCheckReport::worst_rel_error() const {
  double w = 0.0;
  for (const auto& e : entries) w = std::max(w, e.max_rel_error);
  return w;
}

namespace {

double eval_scalar(const std::function<Var()>& loss_fn) {
  const double v = loss_fn()->value[0];
  if (!std::isfinite(v)) throw NumericalError("grad_check: loss is not finite");
  return v;
}

}  // namespace

GradCheckReport grad_check(const std::function<Var()>& loss_fn, ParamStore& params, const GradCheckOptions& opts) {
  if (!(opts.step > 0)) throw ValidationError("grad_check: step must be positive");

  params.zero_grad();
  Var loss = loss_fn();
  if (!std::isfinite(loss->value[0])) throw NumericalError("grad_check: loss is not finite");
  backward(loss);
  loss.reset();

  GradCheckReport report;
  for (const auto& [name, var] : params.all()) {
    if (!opts.only.empty() && std::find(opts.only.begin(), opts.only.end(), name) == opts.only.end()) continue;
    GradCheckEntry entry{name, var->value.size(), 0.0, 0.0, true};
    const Matrix analytic = var->grad;
    for (std::size_t i = 0; i < var->value.size(); ++i) {
      const double orig = var->value[i];
      var->value[i] = orig + opts.step;
      const double up = eval_scalar(loss_fn);
      var->value[i] = orig - opts.step;
      const double down = eval_scalar(loss_fn);
      var->value[i] = orig;
      const double numeric = (up - down) / (2.0 * opts.step);
      const double a = analytic[i];
      const double abs_err = std::abs(a - numeric);
      const double rel = abs_err / std::max({std::abs(a), std::abs(numeric), opts.floor});
      entry.max_abs_error = std::max(entry.max_abs_error, abs_err);
      entry.max_rel_error = std::max(entry.max_rel_error, rel);
    }
    entry.passed = entry.max_rel_error <= opts.tolerance;
    report.passed = report.passed && entry.passed;
    report.entries.push_back(entry);
  }
  return report;
}

}  // namespace s2gsl
