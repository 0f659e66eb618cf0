#pragma once

#include <string>
#include <vector>

#include "training.hpp"

namespace s2gsl {

struct VariantResult {
  std::string name;
  std::vector<double> accuracy;  // per seed
  std::vector<double> macro_f1;
  double mean_accuracy() const;
  double mean_macro_f1() const;
};

// Model variants compared by `ablate`, in table order.
std::vector<std::string> ablation_variants();
// Applies a variant name (full, no_sesg, no_sylg, no_fusion, concat, sum,
// gate) to a copy of the config.
Config apply_variant(const Config& base, const std::string& variant);

// Trains every variant for seeds base.seed .. base.seed + ablate_seeds - 1 and
// scores the best checkpoint on the eval split.
std::vector<VariantResult> run_ablation(const Config& base, const std::vector<std::string>& variants,
                                        const std::function<void(const std::string&)>& progress = {});

std::string format_ablation_table(const std::vector<VariantResult>& rows);

}  // namespace s2gsl
