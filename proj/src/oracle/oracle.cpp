#include "oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "../tensor/errors.hpp"

namespace s2gsl::oracle {

namespace {

// True when following parents from every node reaches `root` without a cycle.
bool is_arborescence(const std::vector<std::size_t>& parent, std::size_t root) {
  const std::size_t n = parent.size();
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t cur = v;
    std::size_t steps = 0;
    while (cur != root) {
      cur = parent[cur];
      if (++steps > n) return false;
    }
  }
  return true;
}

}  // namespace

ArborescenceSummary enumerate_arborescences(const Grid& edge_w, const std::vector<double>& root_w) {
  const std::size_t n = root_w.size();
  if (n == 0 || n > 8) throw ValidationError("enumerate_arborescences supports 1 <= n <= 8");
  if (edge_w.size() != n) throw ValidationError("edge weight matrix does not match root weights");
  for (const auto& row : edge_w) {
    if (row.size() != n) throw ValidationError("edge weight matrix must be square");
    for (double w : row)
      if (w < 0) throw ValidationError("edge weights must be non-negative");
  }
  for (double w : root_w)
    if (w < 0) throw ValidationError("root weights must be non-negative");

  ArborescenceSummary out;
  out.edge_marginals.assign(n, std::vector<double>(n, 0.0));
  out.root_probs.assign(n, 0.0);

  std::vector<std::size_t> parent(n);
  for (std::size_t root = 0; root < n; ++root) {
    // Odometer over parent choices for the non-root nodes; digit values skip self.
    std::vector<std::size_t> others;
    for (std::size_t v = 0; v < n; ++v)
      if (v != root) others.push_back(v);
    std::vector<std::size_t> digit(others.size(), 0);
    auto parent_of = [&](std::size_t k) {
      const std::size_t v = others[k];
      return digit[k] < v ? digit[k] : digit[k] + 1;
    };
    for (;;) {
      parent[root] = root;
      for (std::size_t k = 0; k < others.size(); ++k) parent[others[k]] = parent_of(k);
      if (is_arborescence(parent, root)) {
        double w = root_w[root];
        for (std::size_t v : others) w *= edge_w[parent[v]][v];
        if (w > 0) ++out.count;
        out.partition += w;
        out.root_probs[root] += w;
        for (std::size_t v : others) out.edge_marginals[parent[v]][v] += w;
      }
      std::size_t k = 0;
      while (k < digit.size() && ++digit[k] == n - 1) digit[k++] = 0;
      if (k == digit.size()) break;
    }
  }

  if (!(out.partition > 0)) throw ValidationError("enumerate_arborescences: partition function is zero");
  for (auto& p : out.root_probs) p /= out.partition;
  for (auto& row : out.edge_marginals)
    for (auto& m : row) m /= out.partition;
  return out;
}

Grid hard_segment_band(const std::vector<std::size_t>& lp, const std::vector<std::size_t>& rp) {
  const std::size_t n = lp.size();
  if (rp.size() != n) throw ValidationError("boundary vectors differ in length");
  for (std::size_t i = 0; i < n; ++i)
    if (lp[i] > i || rp[i] < i || rp[i] >= n)
      throw ValidationError("boundaries at position " + std::to_string(i) + " violate lp <= i <= rp < n");
  Grid band(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = lp[i]; j <= rp[i]; ++j) band[i][j] = 1.0;
  return band;
}

double micro_loss(const std::string& name) {
  if (name == "ce_uniform3") return std::log(3.0);
  if (name == "ce_p0.9") return -std::log(0.9);
  if (name == "bce_sigmoid0_one") return std::log(2.0);
  if (name == "bce_sigmoid2_one") return std::log(1.0 + std::exp(-2.0));
  if (name == "root_bce_n2") return 2.0 * std::log(2.0);
  if (name == "total_1_0.5_0.2") return 1.15;
  throw ValidationError("unknown micro-loss case '" + name + "'");
}

std::vector<std::string> micro_loss_names() {
  return {"ce_uniform3", "ce_p0.9", "bce_sigmoid0_one", "bce_sigmoid2_one", "root_bce_n2", "total_1_0.5_0.2"};
}

}  // namespace s2gsl::oracle
