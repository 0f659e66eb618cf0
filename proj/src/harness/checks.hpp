#pragma once

#include <cstdint>
#include <string>

#include "../tensor/gradcheck.hpp"
#include "model.hpp"

namespace s2gsl {

// Latent-tree inference against brute-force enumeration on random instances
// with n in [2, 6] and edge/root scores uniform in (0, 1].
struct TreeCheck {
  std::size_t instances = 0;
  double max_edge_error = 0.0;
  double max_root_error = 0.0;
  double max_root_sum_error = 0.0;    // |sum_j P^r_j - 1|
  double max_parent_sum_error = 0.0;  // |P^r_j + sum_i A_ij - 1|
  double min_marginal = 0.0;
  double max_marginal = 0.0;
  double seconds = 0.0;
};
TreeCheck tree_oracle_check(std::size_t trials, std::uint64_t seed, MttVariant variant);

// One-hot boundary matrices pushed through segment_mask against the hard band.
struct BandCheck {
  std::size_t instances = 0;
  std::size_t mismatches = 0;  // instances with any differing cell
};
BandCheck segment_band_check(std::size_t trials, std::uint64_t seed);

// The fixed five-token record used for the full-model gradient check.
SentenceRecord gradcheck_record();
// Config for the check: d = 16, l = 2, two latent-tree heads.
Config gradcheck_config(std::uint64_t seed);
// Full objective on gradcheck_record(), every parameter, h = 1e-5, tol 1e-4.
GradCheckReport model_grad_check(std::uint64_t seed);

}  // namespace s2gsl
