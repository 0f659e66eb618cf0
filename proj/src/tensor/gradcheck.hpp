#pragma once

#include <functional>
#include <string>
#include <vector>

#include "params.hpp"

namespace s2gsl {

struct GradCheckEntry {
  std::string name;
  std::size_t coords = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  bool passed = false;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  bool passed = true;
  double worst_rel_error() const;
};

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Denominator floor for the relative error |a - n| / max(|a|, |n|, floor).
  double floor = 1e-6;
  // Restrict to these names (empty = every parameter).
  std::vector<std::string> only;
};

// Central finite differences against the analytic gradient from `backward`.
// `loss_fn` must rebuild the graph from current parameter values each call.
GradCheckReport grad_check(const std::function<Var()>& loss_fn, ParamStore& params,
                           const GradCheckOptions& opts = {});

}  // namespace s2gsl
