#include "model.hpp"

#include <array>
#include <cmath>

namespace s2gsl {

namespace {

constexpr double kProbFloor = 1e-12;

Var zero_scalar() { return constant(Matrix(1, 1)); }

}  // namespace

FusionMode effective_fusion(const Config& cfg) {
  return cfg.ablation == Ablation::no_fusion ? FusionMode::concat : cfg.fusion_mode;
}

std::size_t fused_width(const Config& cfg) {
  switch (effective_fusion(cfg)) {
    case FusionMode::adaptive: return 3 * cfg.dim;
    case FusionMode::concat: return 2 * cfg.dim;
    case FusionMode::sum:
    case FusionMode::gate: return cfg.dim;
  }
  return cfg.dim;
}

Model::Model(Config cfg, Vocab words, Vocab labels)
    : cfg_(std::move(cfg)), words_(std::move(words)), labels_(std::move(labels)), params_(cfg_.seed) {
  cfg_.validate();
  init_params();
}

Model::Model(Config cfg, Vocab words, Vocab labels, const std::map<std::string, Matrix>& values)
    : Model(std::move(cfg), std::move(words), std::move(labels)) {
  if (values.size() != params_.all().size())
    throw ValidationError("checkpoint holds " + std::to_string(values.size()) + " parameters, model expects " +
                          std::to_string(params_.all().size()));
  for (const auto& [name, var] : params_.all()) {
    auto it = values.find(name);
    if (it == values.end()) throw ValidationError("checkpoint is missing parameter '" + name + "'");
    if (!it->second.same_shape(var->value))
      throw ValidationError("parameter '" + name + "' has shape " + it->second.shape_str() + ", expected " +
                            var->value.shape_str());
    var->value = it->second;
  }
}

void Model::init_params() {
  if (words_.size() == 0) throw ValidationError("word vocabulary is empty");
  if (labels_.size() < 2) throw ValidationError("label vocabulary must hold the reserved entries");
  init_encoder_params(params_, cfg_.encoder(), words_.size());
  if (cfg_.ablation != Ablation::no_sesg) init_sesg_params(params_, cfg_.sesg());
  if (cfg_.ablation != Ablation::no_sylg) init_sylg_params(params_, cfg_.sylg(), labels_.size());
  const FusionMode mode = effective_fusion(cfg_);
  if (mode == FusionMode::adaptive) init_fusion_params(params_, cfg_.fusion());
  if (mode == FusionMode::gate) init_gate_params(params_, cfg_.fusion());
  params_.create("classifier.weight", fused_width(cfg_), kNumClasses);
  params_.create("classifier.bias", 1, kNumClasses);
}

PreparedRecord Model::prepare(const SentenceRecord& rec) const {
  validate_record(rec);
  if (rec.size() > cfg_.max_len)
    throw ValidationError("record has " + std::to_string(rec.size()) + " tokens, max_len is " +
                          std::to_string(cfg_.max_len));
  PreparedRecord out;
  out.ids = token_ids(rec, words_);
  out.relation = build_relation_matrix(rec, labels_);
  out.signal = build_segment_signal(parse_bracketed_tree(rec.constituency), cfg_.layers);
  out.aspect = {rec.aspect_from, rec.aspect_to};
  out.label = static_cast<std::size_t>(rec.polarity);
  return out;
}

ForwardResult Model::forward(const PreparedRecord& rec) const {
  ForwardResult out;
  out.encoded = encode(rec.ids, params_, cfg_.encoder(), rec.aspect);

  if (cfg_.ablation == Ablation::no_sesg) {
    out.semantic = out.encoded;
    out.seg_loss = zero_scalar();
  } else {
    out.sesg = sesg_forward(out.encoded, params_, rec.signal, cfg_.sesg());
    out.semantic = out.sesg->features;
    out.seg_loss = out.sesg->loss;
  }

  if (cfg_.ablation == Ablation::no_sylg) {
    out.syntactic = out.encoded;
    out.root_loss = zero_scalar();
  } else {
    out.sylg = sylg_forward(out.encoded, rec.relation, rec.aspect, params_, cfg_.sylg());
    out.syntactic = out.sylg->features;
    out.root_loss = out.sylg->loss;
  }

  const FusionMode mode = effective_fusion(cfg_);
  if (mode == FusionMode::adaptive) {
    FusionOutput f = adaptive_fusion(out.semantic, out.syntactic, params_, cfg_.fusion());
    out.fused = f.fused;
    out.alpha = f.alpha;
  } else {
    out.fused = fuse_alternative(mode, out.semantic, out.syntactic, params_);
  }

  Var pooled = ad::mean_rows(out.fused, rec.aspect.first, rec.aspect.last);
  Var logits = ad::add_row_bias(ad::matmul(pooled, params_.get("classifier.weight")), params_.get("classifier.bias"));
  out.probs = ad::softmax_rows(logits);
  return out;
}

Var cross_entropy(const Var& probs, std::size_t label) { return ad::neg_log_pick(probs, label, kProbFloor); }

double cross_entropy(std::span<const double> probs, std::size_t label) {
  if (label >= probs.size()) throw ValidationError("label out of range");
  return -std::log(std::max(probs[label], kProbFloor));
}

double total_loss(double l_c, double l_seg, double l_r, double lambda1, double lambda2) {
  const std::array<std::pair<const char*, double>, 3> parts{{{"L_C", l_c}, {"L_seg", l_seg}, {"L_r", l_r}}};
  for (const auto& [name, v] : parts)
    if (!std::isfinite(v)) throw NumericalError(std::string("non-finite loss component ") + name);
  if (lambda1 < 0 || lambda2 < 0) throw ValidationError("loss weights must be non-negative");
  return l_c + lambda1 * l_seg + lambda2 * l_r;
}

Var total_loss(const Var& l_c, const Var& l_seg, const Var& l_r, double lambda1, double lambda2) {
  total_loss(l_c->value[0], l_seg->value[0], l_r->value[0], lambda1, lambda2);
  return ad::add(ad::add(l_c, ad::affine(l_seg, lambda1)), ad::affine(l_r, lambda2));
}

Var record_loss(const Model& model, const PreparedRecord& rec) {
  ForwardResult f = model.forward(rec);
  const Config& c = model.config();
  return total_loss(cross_entropy(f.probs, rec.label), f.seg_loss, f.root_loss, c.lambda1, c.lambda2);
}

std::size_t count_params(const ParamStore& params) { return params.count_scalars(); }

}  // namespace s2gsl
