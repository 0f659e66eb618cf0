#pragma once

#include <vector>

#include "../data/tree.hpp"
#include "../tensor/layers.hpp"
#include "../tensor/params.hpp"

namespace s2gsl {

// Segment-aware semantic graph branch.

enum class AdjacencyMode { per_layer, head_mean };
enum class BoundarySide { left, right };

struct SesgConfig {
  std::size_t dim = 32;
  std::size_t heads = 4;  // one head per constituent layer
  std::size_t gcn_layers = 3;
  AdjacencyMode adjacency = AdjacencyMode::per_layer;
  // Replace near-zero mask cells by -inf before the softmax instead of the
  // plain multiplicative mask.
  bool logit_masking = false;
  double logit_mask_threshold = 1e-6;
  // Supervise sigmoid of the masked pre-softmax logits instead of sigmoid of
  // the attention probabilities.
  bool supervise_presoftmax = false;
  Activation activation = Activation::relu;
};

void init_sesg_params(ParamStore& params, const SesgConfig& cfg);

// Additive mask: 0 where admissible, -inf elsewhere. Left admits j <= i,
// right admits j >= i.
Matrix causal_mask(std::size_t n, BoundarySide side);

struct Boundaries {
  Var left;   // phi_l, row i: distribution of the left boundary of token i
  Var right;  // phi_r
};

Boundaries boundary_attention(const Var& hc, const ParamStore& params, const SesgConfig& cfg);

// M_s = (phi_l U) .* (phi_r U^T), U the inclusive upper-triangular ones matrix.
Var segment_mask(const Var& left, const Var& right);

struct SegmentAttention {
  std::vector<Var> probs;   // A^SeS per head, row-stochastic
  std::vector<Var> logits;  // masked logits fed to each softmax
};

SegmentAttention segment_attention(const Var& hc, const Var& mask, const ParamStore& params, const SesgConfig& cfg);

// Mean BCE(sigmoid(x), Y) over heads x n x n, head k against layer k.
Var segment_loss(const SegmentAttention& att, const SegmentSignal& signal, bool presoftmax);

struct SesgOutput {
  Var features;  // H^SeS
  Var loss;      // L_seg
  Boundaries boundaries;
  Var mask;
  SegmentAttention attention;
};

// `forced_adjacency` replaces every GCN adjacency (test hook).
SesgOutput sesg_forward(const Var& hc, const ParamStore& params, const SegmentSignal& signal, const SesgConfig& cfg,
                        const Var* forced_adjacency = nullptr);

}  // namespace s2gsl
