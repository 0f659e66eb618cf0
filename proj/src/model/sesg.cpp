#include "sesg.hpp"

#include <cmath>
#include <limits>

namespace s2gsl {

namespace {

std::string head_name(std::size_t k, const char* what) { return "sesg.head." + std::to_string(k) + "." + what; }
std::string gcn_name(std::size_t k, const char* what) { return "sesg.gcn." + std::to_string(k) + "." + what; }

Var scaled_scores(const Var& hc, const Var& wq, const Var& wk, std::size_t dim) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  return ad::affine(ad::matmul_nt(ad::matmul(hc, wq), ad::matmul(hc, wk)), scale);
}

}  // namespace

void init_sesg_params(ParamStore& params, const SesgConfig& cfg) {
  if (cfg.heads < 1 || cfg.gcn_layers < 1) throw ValidationError("sesg needs >= 1 head and >= 1 GCN layer");
  const std::size_t d = cfg.dim;
  for (const char* side : {"left", "right"}) {
    params.create(std::string("sesg.boundary.") + side + ".query", d, d);
    params.create(std::string("sesg.boundary.") + side + ".key", d, d);
  }
  for (std::size_t k = 0; k < cfg.heads; ++k) {
    params.create(head_name(k, "query"), d, d);
    params.create(head_name(k, "key"), d, d);
  }
  for (std::size_t k = 0; k < cfg.gcn_layers; ++k) {
    params.create(gcn_name(k, "weight"), d, d);
    params.create(gcn_name(k, "bias"), 1, d);
  }
}

Matrix causal_mask(std::size_t n, BoundarySide side) {
  if (n < 1) throw ValidationError("causal_mask needs n >= 1");
  Matrix m(n, n);
  const double kill = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const bool open = side == BoundarySide::left ? j <= i : j >= i;
      if (!open) m(i, j) = kill;
    }
  return m;
}

Boundaries boundary_attention(const Var& hc, const ParamStore& params, const SesgConfig& cfg) {
  const std::size_t n = hc->value.rows();
  Var sl = scaled_scores(hc, params.get("sesg.boundary.left.query"), params.get("sesg.boundary.left.key"), cfg.dim);
  Var sr = scaled_scores(hc, params.get("sesg.boundary.right.query"), params.get("sesg.boundary.right.key"), cfg.dim);
  return {masked_softmax(sl, causal_mask(n, BoundarySide::left)),
          masked_softmax(sr, causal_mask(n, BoundarySide::right))};
}

Var segment_mask(const Var& left, const Var& right) {
  const std::size_t n = left->value.rows();
  if (!left->value.same_shape(right->value) || left->value.cols() != n)
    throw ValidationError("segment_mask expects two n x n boundary matrices");
  Matrix upper(n, n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = k; j < n; ++j) upper(k, j) = 1.0;
  Var u = constant(upper);
  // (phi_l U)[i][j] = P(lp_i <= j); (phi_r U^T)[i][j] = P(rp_i >= j)
  return ad::mul(ad::matmul(left, u), ad::matmul_nt(right, u));
}

SegmentAttention segment_attention(const Var& hc, const Var& mask, const ParamStore& params, const SesgConfig& cfg) {
  if (cfg.heads < 1) throw ValidationError("segment_attention needs >= 1 head");
  SegmentAttention out;
  Matrix kill;
  if (cfg.logit_masking) {
    kill = Matrix(mask->value.rows(), mask->value.cols());
    for (std::size_t i = 0; i < kill.size(); ++i)
      if (mask->value[i] < cfg.logit_mask_threshold) kill[i] = kMaskSentinel;
  }
  for (std::size_t k = 0; k < cfg.heads; ++k) {
    Var logits = ad::mul(scaled_scores(hc, params.get(head_name(k, "query")), params.get(head_name(k, "key")), cfg.dim),
                         mask);
    out.logits.push_back(logits);
    out.probs.push_back(ad::softmax_rows(logits, cfg.logit_masking ? &kill : nullptr));
  }
  return out;
}

Var segment_loss(const SegmentAttention& att, const SegmentSignal& signal, bool presoftmax) {
  const auto& src = presoftmax ? att.logits : att.probs;
  if (src.size() != signal.layers.size())
    throw ValidationError("segment_loss: " + std::to_string(src.size()) + " heads vs " +
                          std::to_string(signal.layers.size()) + " supervision layers");
  Var total;
  for (std::size_t k = 0; k < src.size(); ++k) {
    Var l = ad::bce_logits_mean(src[k], signal.layers[k]);
    total = total ? ad::add(total, l) : l;
  }
  return ad::affine(total, 1.0 / static_cast<double>(src.size()));
}

SesgOutput sesg_forward(const Var& hc, const ParamStore& params, const SegmentSignal& signal, const SesgConfig& cfg,
                        const Var* forced_adjacency) {
  if (cfg.gcn_layers < 1) throw ValidationError("sesg needs >= 1 GCN layer");
  SesgOutput out;
  out.boundaries = boundary_attention(hc, params, cfg);
  out.mask = segment_mask(out.boundaries.left, out.boundaries.right);
  out.attention = segment_attention(hc, out.mask, params, cfg);
  out.loss = segment_loss(out.attention, signal, cfg.supervise_presoftmax);

  Var head_mean;
  if (cfg.adjacency == AdjacencyMode::head_mean) {
    for (const auto& p : out.attention.probs) head_mean = head_mean ? ad::add(head_mean, p) : p;
    head_mean = ad::affine(head_mean, 1.0 / static_cast<double>(cfg.heads));
  }
  Var h = hc;
  for (std::size_t k = 0; k < cfg.gcn_layers; ++k) {
    Var adj = forced_adjacency ? *forced_adjacency
              : cfg.adjacency == AdjacencyMode::head_mean ? head_mean
                                                           : out.attention.probs[k % cfg.heads];
    h = graph_conv(adj, h, params.get(gcn_name(k, "weight")), params.get(gcn_name(k, "bias")), cfg.activation);
  }
  out.features = h;
  return out;
}

}  // namespace s2gsl
