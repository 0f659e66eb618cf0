#include "ablate.hpp"

#include <cstdio>
#include <numeric>

namespace s2gsl {

namespace {

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

double VariantResult::mean_accuracy() const { return mean_of(accuracy); }
double VariantResult::mean_macro_f1() const { return mean_of(macro_f1); }

std::vector<std::string> ablation_variants() {
  return {"full", "no_sesg", "no_sylg", "no_fusion", "concat", "sum", "gate"};
}

Config apply_variant(const Config& base, const std::string& variant) {
  Config c = base;
  c.ablation = Ablation::full;
  c.fusion_mode = FusionMode::adaptive;
  if (variant == "concat" || variant == "sum" || variant == "gate")
    c.fusion_mode = parse_fusion_mode(variant);
  else
    c.ablation = parse_ablation(variant);
  return c;
}

std::vector<VariantResult> run_ablation(const Config& base, const std::vector<std::string>& variants,
                                        const std::function<void(const std::string&)>& progress) {
  if (base.ablate_seeds == 0) throw ValidationError("ablate_seeds must be >= 1");
  const DataSplits data = load_splits(base);
  std::vector<VariantResult> out;
  for (const auto& v : variants) {
    VariantResult row;
    row.name = v;
    for (std::size_t s = 0; s < base.ablate_seeds; ++s) {
      Config c = apply_variant(base, v);
      c.seed = base.seed + s;
      const TrainResult r = train(c, data.train, data.dev);
      const Metrics m = evaluate(r.best, prepare_all(r.best, data.eval));
      row.accuracy.push_back(m.accuracy);
      row.macro_f1.push_back(m.macro_f1);
      if (progress) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s seed %llu: acc %.4f f1 %.4f (best epoch %zu)", v.c_str(),
                      static_cast<unsigned long long>(c.seed), m.accuracy, m.macro_f1, r.best_epoch);
        progress(buf);
      }
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::string format_ablation_table(const std::vector<VariantResult>& rows) {
  std::string s = "variant     mean_acc  mean_f1   per-seed acc\n";
  for (const auto& r : rows) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-10s  %.4f    %.4f   ", r.name.c_str(), r.mean_accuracy(), r.mean_macro_f1());
    s += buf;
    for (std::size_t i = 0; i < r.accuracy.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s%.4f", i ? " " : "", r.accuracy[i]);
      s += buf;
    }
    s += '\n';
  }
  return s;
}

}  // namespace s2gsl
