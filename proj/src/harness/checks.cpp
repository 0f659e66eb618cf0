#include "checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "../oracle/oracle.hpp"

namespace s2gsl {

TreeCheck tree_oracle_check(std::size_t trials, std::uint64_t seed, MttVariant variant) {
  const auto start = std::chrono::steady_clock::now();
  SeededStream rng(seed, "tree-oracle");
  TreeCheck out;
  out.min_marginal = 1.0;
  out.max_marginal = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t n = 2 + rng.below(5);
    Matrix w(n, n), phi(n, 1);
    oracle::Grid grid(n, std::vector<double>(n, 0.0));
    std::vector<double> roots(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        w(i, j) = grid[i][j] = 1.0 - rng.next_unit();
      }
    for (std::size_t i = 0; i < n; ++i) phi[i] = roots[i] = 1.0 - rng.next_unit();

    const LatentTree tree = tree_marginals(constant(w), constant(phi), variant);
    const oracle::ArborescenceSummary ref = oracle::enumerate_arborescences(grid, roots);
    const Matrix& a = tree.marginals->value;
    const Matrix& p = tree.root_probs->value;
    double root_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      root_sum += p[j];
      out.max_root_error = std::max(out.max_root_error, std::abs(p[j] - ref.root_probs[j]));
      double parents = p[j];
      for (std::size_t i = 0; i < n; ++i) {
        parents += a(i, j);
        out.max_edge_error = std::max(out.max_edge_error, std::abs(a(i, j) - ref.edge_marginals[i][j]));
        out.min_marginal = std::min(out.min_marginal, a(i, j));
        out.max_marginal = std::max(out.max_marginal, a(i, j));
      }
      out.min_marginal = std::min(out.min_marginal, p[j]);
      out.max_marginal = std::max(out.max_marginal, p[j]);
      out.max_parent_sum_error = std::max(out.max_parent_sum_error, std::abs(parents - 1.0));
    }
    out.max_root_sum_error = std::max(out.max_root_sum_error, std::abs(root_sum - 1.0));
    ++out.instances;
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

BandCheck segment_band_check(std::size_t trials, std::uint64_t seed) {
  SeededStream rng(seed, "segment-band");
  BandCheck out;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t n = 1 + rng.below(10);
    std::vector<std::size_t> lp(n), rp(n);
    Matrix left(n, n), right(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      lp[i] = rng.below(i + 1);
      rp[i] = i + rng.below(n - i);
      left(i, lp[i]) = 1.0;
      right(i, rp[i]) = 1.0;
    }
    const Matrix mask = segment_mask(constant(left), constant(right))->value;
    const oracle::Grid band = oracle::hard_segment_band(lp, rp);
    bool same = true;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) same = same && mask(i, j) == band[i][j];
    if (!same) ++out.mismatches;
    ++out.instances;
  }
  return out;
}

SentenceRecord gradcheck_record() {
  SentenceRecord r;
  r.tokens = {"the", "soup", "was", "really", "good"};
  r.aspect_from = 1;
  r.aspect_to = 1;
  r.polarity = Polarity::positive;
  r.dep_head = {2, 5, 5, 5, 0};
  r.dep_label = {"det", "nsubj", "cop", "advmod", "root"};
  r.constituency = "(ROOT (S (NP (DT the) (NN soup)) (VP (VB was) (ADVP (RB really)) (JJ good))))";
  return r;
}

Config gradcheck_config(std::uint64_t seed) {
  Config c;
  c.dim = 16;
  c.layers = 2;
  c.sylg_heads = 2;
  c.seed = seed;
  return c;
}

GradCheckReport model_grad_check(std::uint64_t seed) {
  const SentenceRecord rec = gradcheck_record();
  const std::vector<SentenceRecord> corpus{rec};
  Model model(gradcheck_config(seed), Vocab::words_from(corpus), Vocab::labels_from(corpus));
  const PreparedRecord prep = model.prepare(rec);
  return grad_check([&] { return record_loss(model, prep); }, model.params());
}

}  // namespace s2gsl
