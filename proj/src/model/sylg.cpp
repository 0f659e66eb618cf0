#include "sylg.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>

namespace s2gsl {

namespace {

std::string head_name(std::size_t k, const char* what) { return "sylg.head." + std::to_string(k) + "." + what; }
std::string gcn_name(std::size_t k, const char* what) { return "sylg.gcn." + std::to_string(k) + "." + what; }

std::mutex g_log_mutex;
std::function<void(const std::string&)> g_log = [](const std::string& msg) { std::cerr << msg << '\n'; };

void log_warning(const std::string& msg) {
  std::lock_guard lock(g_log_mutex);
  if (g_log) g_log(msg);
}

Matrix off_diagonal_ones(std::size_t n) {
  Matrix m(n, n, 1.0);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 0.0;
  return m;
}

}  // namespace

void set_sylg_log(std::function<void(const std::string&)> sink) {
  std::lock_guard lock(g_log_mutex);
  g_log = std::move(sink);
}

void init_sylg_params(ParamStore& params, const SylgConfig& cfg, std::size_t num_labels) {
  if (cfg.heads < 1 || cfg.gcn_layers < 1) throw ValidationError("sylg needs >= 1 head and >= 1 GCN layer");
  if (num_labels < 2) throw ValidationError("relation vocabulary must hold the reserved entries");
  const std::size_t d = cfg.dim;
  // No row for id 0: "no relation" is the fixed zero vector.
  params.create("sylg.relation_embedding", num_labels - 1, cfg.relation_dim);
  params.create("sylg.relation_proj.weight", cfg.relation_dim, cfg.heads);
  params.create("sylg.relation_proj.bias", 1, cfg.heads);
  for (std::size_t k = 0; k < cfg.heads; ++k) {
    params.create(head_name(k, "query"), d, d);
    params.create(head_name(k, "key"), d, d);
  }
  params.create("sylg.root.weight", d, 1);
  params.create("sylg.root.bias", 1, 1);
  for (std::size_t k = 0; k < cfg.gcn_layers; ++k) {
    params.create(gcn_name(k, "weight"), d, d);
    params.create(gcn_name(k, "bias"), 1, d);
  }
}

Var embed_relations(const RelationMatrix& rel, const ParamStore& params) {
  return ad::gather_rows(params.get("sylg.relation_embedding"), rel.ids, true);
}

EnhancedWeights enhanced_weights(const Var& hc, const Var& relations, const ParamStore& params,
                                 const SylgConfig& cfg) {
  const std::size_t n = hc->value.rows();
  if (relations->value.rows() != n * n) throw ValidationError("relation tensor does not match sentence length");
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.dim));
  // (n*n) x heads: one projected relation score per cell and head.
  Var projected = ad::add_row_bias(ad::matmul(relations, params.get("sylg.relation_proj.weight")),
                                   params.get("sylg.relation_proj.bias"));
  EnhancedWeights out;
  Var sum;
  for (std::size_t k = 0; k < cfg.heads; ++k) {
    Var q = ad::matmul(hc, params.get(head_name(k, "query")));
    Var key = ad::matmul(hc, params.get(head_name(k, "key")));
    Var a_att = ad::softmax_rows(ad::affine(ad::matmul_nt(q, key), scale));
    Var a_rel = ad::column_as_square(projected, k, n);
    Var combined = ad::softmax_rows(ad::add(a_rel, a_att));
    out.attention.push_back(a_att);
    out.relation.push_back(a_rel);
    out.combined.push_back(combined);
    sum = sum ? ad::add(sum, combined) : combined;
  }
  out.averaged = ad::mul_const(ad::affine(sum, 1.0 / static_cast<double>(cfg.heads)), off_diagonal_ones(n));
  return out;
}

Var root_scores(const Var& hc, const ParamStore& params, const SylgConfig& cfg) {
  const std::size_t n = hc->value.rows();
  Var logits = ad::add(ad::matmul(hc, params.get("sylg.root.weight")),
                       ad::broadcast_rows(params.get("sylg.root.bias"), n));
  return ad::exp(ad::clamp(logits, -cfg.root_logit_clamp, cfg.root_logit_clamp));
}

LatentTree tree_marginals(const Var& weights, const Var& phi, MttVariant variant, double ridge) {
  const std::size_t n = weights->value.rows();
  if (weights->value.cols() != n || phi->value.rows() != n || phi->value.cols() != 1)
    throw ValidationError("tree_marginals expects n x n weights and n x 1 root scores");
  for (std::size_t i = 0; i < weights->value.size(); ++i) {
    if (!std::isfinite(weights->value[i])) throw NumericalError("tree_marginals: non-finite edge weight");
    if (weights->value[i] < 0.0) throw ValidationError("tree_marginals: edge weights must be non-negative");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(phi->value[i])) throw NumericalError("tree_marginals: non-finite root score");
    if (phi->value[i] <= 0.0) throw ValidationError("tree_marginals: root scores must be positive");
  }

  Var a = ad::mul_const(weights, off_diagonal_ones(n));
  Var lap = ad::sub(ad::row_to_diag(ad::col_sums(a)), a);
  if (variant == MttVariant::row_replace) {
    lap = ad::replace_row(lap, 0, ad::transpose(phi));
  } else {
    lap = ad::add(lap, ad::row_to_diag(ad::transpose(phi)));
  }

  LatentTree out;
  const double pivot_tol = 1e-13 * std::max(1.0, lap->value.max_abs());
  try {
    out.laplacian_inverse = ad::inverse(lap, pivot_tol);
  } catch (const NumericalError&) {
    log_warning("tree_marginals: singular Laplacian (n=" + std::to_string(n) + "), retrying with ridge " +
                std::to_string(ridge));
    Matrix eps = Matrix::identity(n);
    for (std::size_t i = 0; i < eps.size(); ++i) eps[i] *= ridge;
    lap = ad::add(lap, constant(eps));
    try {
      out.laplacian_inverse = ad::inverse(lap, ridge * 1e-3);
    } catch (const NumericalError&) {
      throw NumericalError("tree_marginals: Laplacian singular even after ridge " + std::to_string(ridge));
    }
    out.used_ridge = true;
  }
  out.laplacian = lap;
  const Var& inv = out.laplacian_inverse;

  // A[i][j] * inv[j][j] for j != first, minus A[i][j] * inv[j][i] for i != first.
  Matrix not_first_col(n, n, 1.0), not_first_row(n, n, 1.0);
  for (std::size_t k = 0; k < n; ++k) {
    not_first_col(k, 0) = 0.0;
    not_first_row(0, k) = 0.0;
  }
  Var term1 = ad::mul_const(ad::mul(a, ad::broadcast_rows(ad::diag_to_row(inv), n)), not_first_col);
  Var term2 = ad::mul_const(ad::mul(a, ad::transpose(inv)), not_first_row);
  out.marginals = ad::sub(term1, term2);
  out.root_probs = ad::mul(phi, ad::slice_cols(inv, 0, 1));
  return out;
}

Var root_loss(const Var& root_probs, const Matrix& aspect_indicator) {
  return ad::bce_prob_sum(root_probs, aspect_indicator, 1e-12);
}

SylgOutput sylg_forward(const Var& hc, const RelationMatrix& rel, Span aspect, const ParamStore& params,
                        const SylgConfig& cfg, const Var* forced_adjacency) {
  if (cfg.gcn_layers < 1) throw ValidationError("sylg needs >= 1 GCN layer");
  const std::size_t n = hc->value.rows();
  if (rel.n != n) throw ValidationError("relation matrix size does not match sentence length");
  if (aspect.last >= n || aspect.first > aspect.last) throw ValidationError("aspect span out of range");

  SylgOutput out;
  out.weights = enhanced_weights(hc, embed_relations(rel, params), params, cfg);
  out.phi = root_scores(hc, params, cfg);
  out.tree = tree_marginals(out.weights.averaged, out.phi, cfg.variant, cfg.ridge);

  Matrix target(n, 1);
  for (std::size_t i = aspect.first; i <= aspect.last; ++i) target(i, 0) = 1.0;
  out.loss = root_loss(out.tree.root_probs, target);

  Var h = hc;
  const Var& adj = forced_adjacency ? *forced_adjacency : out.tree.marginals;
  for (std::size_t k = 0; k < cfg.gcn_layers; ++k)
    h = graph_conv(adj, h, params.get(gcn_name(k, "weight")), params.get(gcn_name(k, "bias")), cfg.activation);
  out.features = h;
  return out;
}

}  // namespace s2gsl
