#pragma once

#include <optional>
#include <vector>

#include "../data/record.hpp"
#include "../data/tree.hpp"
#include "config.hpp"

namespace s2gsl {

// Everything forward() needs from a record, computed once per record.
struct PreparedRecord {
  std::vector<std::size_t> ids;
  RelationMatrix relation;
  SegmentSignal signal;
  Span aspect;
  std::size_t label = 0;
  std::size_t size() const { return ids.size(); }
};

struct ForwardResult {
  Var probs;  // 1 x 3
  Var seg_loss;
  Var root_loss;
  Var encoded;   // H^c
  Var semantic;  // H^SeS, or H^c when the branch is ablated
  Var syntactic; // H^SyL, or H^c when the branch is ablated
  Var fused;     // H^F
  Var alpha;     // 1 x 3 stream weights, null outside adaptive fusion
  std::optional<SesgOutput> sesg;
  std::optional<SylgOutput> sylg;
};

// Classifier input width for the configured fusion.
std::size_t fused_width(const Config& cfg);
// The fusion actually used after the ablation override.
FusionMode effective_fusion(const Config& cfg);

class Model {
 public:
  // Fresh parameters seeded from cfg.seed.
  Model(Config cfg, Vocab words, Vocab labels);
  // Restores trained parameters; every expected name must be present with the
  // expected shape.
  Model(Config cfg, Vocab words, Vocab labels, const std::map<std::string, Matrix>& values);

  const Config& config() const { return cfg_; }
  const Vocab& words() const { return words_; }
  const Vocab& labels() const { return labels_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  PreparedRecord prepare(const SentenceRecord& rec) const;
  ForwardResult forward(const PreparedRecord& rec) const;

 private:
  void init_params();

  Config cfg_;
  Vocab words_;
  Vocab labels_;
  ParamStore params_;
};

// -ln max(y[label], 1e-12).
Var cross_entropy(const Var& probs, std::size_t label);
double cross_entropy(std::span<const double> probs, std::size_t label);

// L_C + lambda1 L_seg + lambda2 L_r. Throws NumericalError naming the first
// non-finite component.
double total_loss(double l_c, double l_seg, double l_r, double lambda1, double lambda2);
Var total_loss(const Var& l_c, const Var& l_seg, const Var& l_r, double lambda1, double lambda2);

// Full objective for one record.
Var record_loss(const Model& model, const PreparedRecord& rec);

std::size_t count_params(const ParamStore& params);

}  // namespace s2gsl
