#pragma once

#include <string>

#include "../tensor/params.hpp"

namespace s2gsl {

// Self-adaptive aggregation of the two graph branches, plus the simple
// fusion baselines it is compared against.

enum class PoolMode { mean, first_row };
enum class FusionMode { adaptive, concat, sum, gate };

struct FusionConfig {
  std::size_t dim = 32;
  std::size_t heads = 2;
  std::size_t ffn_hidden = 64;
  double ln_eps = 1e-5;
  PoolMode pool = PoolMode::mean;
};

// Parameters for one transformer-style cross-attention stream under `prefix`.
void init_cross_stream_params(ParamStore& params, const std::string& prefix, const FusionConfig& cfg);
// LN(FFN(O) + O) with O = LN(MultiHead(query, kv, kv) + query).
Var cross_stream(const Var& query, const Var& kv, const ParamStore& params, const std::string& prefix,
                 const FusionConfig& cfg);

void init_balance_params(ParamStore& params, const FusionConfig& cfg);
// Two-layer feed-forward map of [sem, syn] (n x 2d) down to n x d.
Var balance_channel(const Var& sem, const Var& syn, const ParamStore& params);

void init_stream_weight_params(ParamStore& params, const FusionConfig& cfg);
// 1 x 3 softmax of relu(w . pool(X_i) + b).
Var stream_weights(const Var& x1, const Var& x2, const Var& x3, const ParamStore& params, const FusionConfig& cfg);

// [a1 X1, a2 X2, a3 X3] along features.
Var fuse(const Var& x1, const Var& x2, const Var& x3, const Var& alpha);

struct FusionOutput {
  Var sem_guided;  // H^SemG
  Var syn_guided;  // H^SynG
  Var balance;     // H^Com
  Var alpha;
  Var fused;       // n x 3d
};

void init_fusion_params(ParamStore& params, const FusionConfig& cfg);
FusionOutput adaptive_fusion(const Var& sem, const Var& syn, const ParamStore& params, const FusionConfig& cfg);

void init_gate_params(ParamStore& params, const FusionConfig& cfg);
// concat -> n x 2d, sum -> n x d, gate -> g .* sem + (1 - g) .* syn.
Var fuse_alternative(FusionMode mode, const Var& sem, const Var& syn, const ParamStore& params);

FusionMode parse_fusion_mode(const std::string& s);
const char* fusion_mode_name(FusionMode m);

}  // namespace s2gsl
