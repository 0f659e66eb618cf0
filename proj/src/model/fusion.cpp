#include "fusion.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace s2gsl {

void init_cross_stream_params(ParamStore& params, const std::string& prefix, const FusionConfig& cfg) {
  const std::size_t d = cfg.dim;
  if (cfg.heads == 0 || d % cfg.heads != 0) throw ValidationError("fusion heads must divide dim");
  for (const char* w : {"query", "key", "value", "output"}) params.create(prefix + ".attn." + w, d, d);
  params.create(prefix + ".ln1.gain", 1, d, Init::ones);
  params.create(prefix + ".ln1.offset", 1, d, Init::zeros);
  params.create(prefix + ".ffn.w1", d, cfg.ffn_hidden);
  params.create(prefix + ".ffn.b1", 1, cfg.ffn_hidden);
  params.create(prefix + ".ffn.w2", cfg.ffn_hidden, d);
  params.create(prefix + ".ffn.b2", 1, d);
  params.create(prefix + ".ln2.gain", 1, d, Init::ones);
  params.create(prefix + ".ln2.offset", 1, d, Init::zeros);
}

Var cross_stream(const Var& query, const Var& kv, const ParamStore& params, const std::string& prefix,
                 const FusionConfig& cfg) {
  if (!query->value.same_shape(kv->value)) throw ValidationError("cross_stream inputs must share a shape");
  const std::size_t d = cfg.dim;
  const std::size_t dh = d / cfg.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  auto p = [&](const char* n) -> const Var& { return params.get(prefix + n); };

  Var q = ad::matmul(query, p(".attn.query"));
  Var k = ad::matmul(kv, p(".attn.key"));
  Var v = ad::matmul(kv, p(".attn.value"));
  std::vector<Var> heads;
  for (std::size_t h = 0; h < cfg.heads; ++h) {
    Var qh = ad::slice_cols(q, h * dh, (h + 1) * dh);
    Var kh = ad::slice_cols(k, h * dh, (h + 1) * dh);
    Var vh = ad::slice_cols(v, h * dh, (h + 1) * dh);
    heads.push_back(ad::matmul(ad::softmax_rows(ad::affine(ad::matmul_nt(qh, kh), scale)), vh));
  }
  Var mh = ad::matmul(ad::concat_cols(heads), p(".attn.output"));
  Var o = ad::layer_norm_rows(ad::add(mh, query), p(".ln1.gain"), p(".ln1.offset"), cfg.ln_eps);
  Var hidden = ad::relu(ad::add_row_bias(ad::matmul(o, p(".ffn.w1")), p(".ffn.b1")));
  Var ffn = ad::add_row_bias(ad::matmul(hidden, p(".ffn.w2")), p(".ffn.b2"));
  return ad::layer_norm_rows(ad::add(ffn, o), p(".ln2.gain"), p(".ln2.offset"), cfg.ln_eps);
}

void init_balance_params(ParamStore& params, const FusionConfig& cfg) {
  const std::size_t d = cfg.dim;
  params.create("fusion.balance.w1", 2 * d, d);
  params.create("fusion.balance.b1", 1, d);
  params.create("fusion.balance.w2", d, d);
  params.create("fusion.balance.b2", 1, d);
}

Var balance_channel(const Var& sem, const Var& syn, const ParamStore& params) {
  const std::array<Var, 2> parts{sem, syn};
  Var x = ad::concat_cols(parts);
  Var hidden = ad::relu(ad::add_row_bias(ad::matmul(x, params.get("fusion.balance.w1")), params.get("fusion.balance.b1")));
  return ad::add_row_bias(ad::matmul(hidden, params.get("fusion.balance.w2")), params.get("fusion.balance.b2"));
}

void init_stream_weight_params(ParamStore& params, const FusionConfig& cfg) {
  params.create("fusion.score.weight", cfg.dim, 1);
  params.create("fusion.score.bias", 1, 1);
}

Var stream_weights(const Var& x1, const Var& x2, const Var& x3, const ParamStore& params, const FusionConfig& cfg) {
  std::array<Var, 3> scores;
  const std::array<const Var*, 3> xs{&x1, &x2, &x3};
  for (std::size_t i = 0; i < 3; ++i) {
    const Var& x = *xs[i];
    Var pooled = cfg.pool == PoolMode::mean ? ad::mean_rows(x, 0, x->value.rows() - 1) : ad::mean_rows(x, 0, 0);
    scores[i] = ad::relu(ad::add(ad::matmul(pooled, params.get("fusion.score.weight")), params.get("fusion.score.bias")));
  }
  return ad::softmax_rows(ad::concat_cols(scores));
}

Var fuse(const Var& x1, const Var& x2, const Var& x3, const Var& alpha) {
  if (alpha->value.rows() != 1 || alpha->value.cols() != 3) throw ValidationError("fuse expects 1 x 3 weights");
  const std::array<Var, 3> parts{ad::scale_by(x1, ad::pick(alpha, 0, 0)), ad::scale_by(x2, ad::pick(alpha, 0, 1)),
                                 ad::scale_by(x3, ad::pick(alpha, 0, 2))};
  return ad::concat_cols(parts);
}

void init_fusion_params(ParamStore& params, const FusionConfig& cfg) {
  init_cross_stream_params(params, "fusion.sem_guided", cfg);
  init_cross_stream_params(params, "fusion.syn_guided", cfg);
  init_balance_params(params, cfg);
  init_stream_weight_params(params, cfg);
}

FusionOutput adaptive_fusion(const Var& sem, const Var& syn, const ParamStore& params, const FusionConfig& cfg) {
  FusionOutput out;
  out.sem_guided = cross_stream(sem, syn, params, "fusion.sem_guided", cfg);
  out.syn_guided = cross_stream(syn, sem, params, "fusion.syn_guided", cfg);
  out.balance = balance_channel(sem, syn, params);
  out.alpha = stream_weights(out.sem_guided, out.syn_guided, out.balance, params, cfg);
  out.fused = fuse(out.sem_guided, out.syn_guided, out.balance, out.alpha);
  return out;
}

void init_gate_params(ParamStore& params, const FusionConfig& cfg) {
  params.create("fusion.gate.weight", 2 * cfg.dim, cfg.dim);
  params.create("fusion.gate.bias", 1, cfg.dim);
}

Var fuse_alternative(FusionMode mode, const Var& sem, const Var& syn, const ParamStore& params) {
  if (!sem->value.same_shape(syn->value)) throw ValidationError("fusion inputs must share a shape");
  const std::array<Var, 2> parts{sem, syn};
  switch (mode) {
    case FusionMode::concat:
      return ad::concat_cols(parts);
    case FusionMode::sum:
      return ad::add(sem, syn);
    case FusionMode::gate: {
      Var g = ad::sigmoid(ad::add_row_bias(ad::matmul(ad::concat_cols(parts), params.get("fusion.gate.weight")),
                                           params.get("fusion.gate.bias")));
      return ad::add(ad::mul(g, sem), ad::mul(ad::affine(g, -1.0, 1.0), syn));
    }
    case FusionMode::adaptive:
      break;
  }
  throw ValidationError("fuse_alternative: unsupported mode '" + std::string(fusion_mode_name(mode)) + "'");
}

FusionMode parse_fusion_mode(const std::string& s) {
  if (s == "adaptive") return FusionMode::adaptive;
  if (s == "concat") return FusionMode::concat;
  if (s == "sum") return FusionMode::sum;
  if (s == "gate") return FusionMode::gate;
  throw ValidationError("unknown fusion mode '" + s + "'");
}

const char* fusion_mode_name(FusionMode m) {
  switch (m) {
    case FusionMode::adaptive: return "adaptive";
    case FusionMode::concat: return "concat";
    case FusionMode::sum: return "sum";
    case FusionMode::gate: return "gate";
  }
  return "?";
}

}  // namespace s2gsl
