#pragma once

// Brute-force references. Deliberately self-contained: plain nested vectors,
// no autodiff and no model code.

#include <cstddef>
#include <string>
#include <vector>

namespace s2gsl::oracle {

using Grid = std::vector<std::vector<double>>;

struct ArborescenceSummary {
  double partition = 0.0;  // Z
  Grid edge_marginals;     // [parent][child]
  std::vector<double> root_probs;
  std::size_t count = 0;   // arborescences with nonzero weight
};

// Exhaustive over every (root, parent vector). n <= 8.
ArborescenceSummary enumerate_arborescences(const Grid& edge_w, const std::vector<double>& root_w);

// band[i][j] = 1 iff lp[i] <= j <= rp[i].
Grid hard_segment_band(const std::vector<std::size_t>& lp, const std::vector<std::size_t>& rp);

// Closed-form loss values for named tiny instances:
//   "ce_uniform3"        cross-entropy of a uniform 3-class prediction
//   "ce_p0.9"            cross-entropy with 0.9 on the gold class
//   "bce_sigmoid0_one"   BCE(sigmoid(0), 1)
//   "bce_sigmoid2_one"   BCE(sigmoid(2), 1)
//   "root_bce_n2"        root loss with t = (1, 0), P = (0.5, 0.5)
//   "total_1_0.5_0.2"    1.0 + 0.1 * 0.5 + 0.5 * 0.2
double micro_loss(const std::string& name);
std::vector<std::string> micro_loss_names();

}  // namespace s2gsl::oracle
