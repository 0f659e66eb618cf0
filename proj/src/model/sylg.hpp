#pragma once

#include <functional>
#include <string>
#include <vector>

#include "../data/tree.hpp"
#include "../tensor/layers.hpp"
#include "../tensor/params.hpp"

namespace s2gsl {

// Syntax-based latent graph branch.

// How the root scores enter the Laplacian.
//  row_replace: column-sum Laplacian with its first row replaced by the root
//               scores; marginals and root probabilities read off its inverse.
//  literal:     root scores added to the Laplacian diagonal, combined with the
//               same first-row-guarded readout. Kept for comparison; it does
//               not yield a normalized tree distribution.
enum class MttVariant { row_replace, literal };

struct SylgConfig {
  std::size_t dim = 32;
  std::size_t heads = 4;
  std::size_t relation_dim = 16;
  std::size_t gcn_layers = 3;
  MttVariant variant = MttVariant::row_replace;
  double root_logit_clamp = 30.0;
  double ridge = 1e-9;
  Activation activation = Activation::relu;
};

void init_sylg_params(ParamStore& params, const SylgConfig& cfg, std::size_t num_labels);

// (n*n) x d_r, row i*n+j holding the embedding of R[i][j]. Id 0 ("no
// relation") embeds to the zero vector; the table holds ids 1.. only.
Var embed_relations(const RelationMatrix& rel, const ParamStore& params);

struct EnhancedWeights {
  std::vector<Var> attention;  // A_a per head
  std::vector<Var> relation;   // A_r per head
  std::vector<Var> combined;   // softmax(A_r + A_a) per head
  Var averaged;                // head mean, diagonal zeroed
};

EnhancedWeights enhanced_weights(const Var& hc, const Var& relations, const ParamStore& params,
                                 const SylgConfig& cfg);

// n x 1 root scores exp(clamp(h W_r + b_r)).
Var root_scores(const Var& hc, const ParamStore& params, const SylgConfig& cfg);

struct LatentTree {
  Var laplacian;
  Var laplacian_inverse;
  Var marginals;   // A^SyL[i][j]: probability of the arc i -> j (i is the parent)
  Var root_probs;  // n x 1
  bool used_ridge = false;
};

// `weights` must be non-negative; its diagonal is ignored. `phi` is n x 1 and
// strictly positive.
LatentTree tree_marginals(const Var& weights, const Var& phi, MttVariant variant, double ridge = 1e-9);

// Sink for numerical warnings such as the ridge fallback. Defaults to stderr.
void set_sylg_log(std::function<void(const std::string&)> sink);

Var root_loss(const Var& root_probs, const Matrix& aspect_indicator);

struct SylgOutput {
  Var features;  // H^SyL
  Var loss;      // L_r
  EnhancedWeights weights;
  Var phi;
  LatentTree tree;
};

SylgOutput sylg_forward(const Var& hc, const RelationMatrix& rel, Span aspect, const ParamStore& params,
                        const SylgConfig& cfg, const Var* forced_adjacency = nullptr);

}  // namespace s2gsl
