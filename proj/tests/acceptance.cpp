// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Training-based criteria use acceptance_config() below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "harness/ablate.hpp"
#include "harness/checks.hpp"
#include "harness/inspect.hpp"
#include "harness/training.hpp"
#include "oracle/oracle.hpp"

using namespace s2gsl;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
  std::printf("criterion %2d %s  %s  (%s)\n", id, pass ? "PASS" : "FAIL", what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Shared by the training criteria.
Config acceptance_config() {
  Config c;
  c.learning_rate = 1e-3;
  c.batch_size = 8;
  c.epochs = 200;
  c.seed = 0;
  c.synthetic_seed = 0;
  return c;
}

void tree_criteria() {
  const auto t = tree_oracle_check(100, 7, MttVariant::row_replace);
  const double err = std::max(t.max_edge_error, t.max_root_error);
  report(1, err <= 1e-8 && t.seconds < 10.0, "latent-tree marginals match enumeration",
         fmt("%zu instances, max error %.2e, %.2f s", t.instances, err, t.seconds));

  const bool bounded = t.min_marginal >= -1e-8 && t.max_marginal <= 1 + 1e-8;
  report(2, t.max_root_sum_error <= 1e-8 && t.max_parent_sum_error <= 1e-8 && bounded,
         "root and parent distributions normalise",
         fmt("root sum err %.2e, parent sum err %.2e, marginals in [%.3g, %.3g]", t.max_root_sum_error,
             t.max_parent_sum_error, t.min_marginal, t.max_marginal));
}

void band_criterion() {
  const auto b = segment_band_check(50, 11);
  report(3, b.mismatches == 0 && b.instances == 50, "one-hot boundaries give the hard segment band",
         fmt("%zu instances, %zu mismatches", b.instances, b.mismatches));
}

void gradient_criterion() {
  const auto t0 = Clock::now();
  const auto r = model_grad_check(0);
  const double secs = seconds_since(t0);
  report(4, r.passed && secs < 60.0, "full-model gradients match finite differences",
         fmt("%zu tensors, worst relative error %.2e, %.1f s", r.entries.size(), r.worst_rel_error(), secs));
}

void loss_criterion() {
  // Each micro loss is recomputed through the model's own loss functions.
  double worst = 0.0;
  auto compare = [&](const std::string& name, double ours) {
    worst = std::max(worst, std::abs(oracle::micro_loss(name) - ours));
  };
  const std::vector<double> uniform = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  compare("ce_uniform3", cross_entropy(uniform, 0));
  const std::vector<double> sure = {0.9, 0.05, 0.05};
  compare("ce_p0.9", cross_entropy(sure, 0));

  auto bce = [](double logit, double target) {
    const Var x = constant(Matrix(1, 1, logit));
    return ad::bce_logits_mean(x, Matrix(1, 1, target))->value(0, 0);
  };
  compare("bce_sigmoid0_one", bce(0.0, 1.0));
  compare("bce_sigmoid2_one", bce(2.0, 1.0));

  const Var roots = constant(Matrix{{0.5}, {0.5}});
  compare("root_bce_n2", root_loss(roots, Matrix{{1.0}, {0.0}})->value(0, 0));
  compare("total_1_0.5_0.2", total_loss(1.0, 0.5, 0.2, 0.1, 0.5));

  report(5, worst <= 1e-9, "loss functions reproduce the reference values",
         fmt("%zu cases, max abs error %.2e", oracle::micro_loss_names().size(), worst));
}

struct TrainedRun {
  TrainResult result;
  DataSplits splits;
};

TrainedRun training_criterion() {
  const Config cfg = acceptance_config();
  DataSplits splits = load_splits(cfg);
  const auto t0 = Clock::now();
  TrainResult r = train(cfg, splits.train, splits.dev);
  const double secs = seconds_since(t0);
  double best_train = 0.0;
  for (const auto& e : r.log) best_train = std::max(best_train, e.train.accuracy);
  const Metrics m = evaluate(r.best, prepare_all(r.best, splits.eval));
  report(6, best_train >= 0.95 && m.accuracy >= 0.85 && secs < 300.0, "training fits and generalises",
         fmt("best train acc %.3f, eval acc %.3f (epoch %zu), %.0f s", best_train, m.accuracy, r.best_epoch, secs));
  return {std::move(r), std::move(splits)};
}

void ablation_criteria() {
  // Three ReLU graph layers sit on a chance-level plateau for ~190 epochs on
  // multi-aspect data; one layer learns within the budget for every variant.
  Config base = acceptance_config();
  base.epochs = 60;
  base.gcn_layers = 1;
  base.synthetic_min_clauses = 2;
  base.ablate_seeds = 3;
  const auto t0 = Clock::now();
  const auto rows = run_ablation(base, ablation_variants());
  std::printf("%s", format_ablation_table(rows).c_str());
  std::printf("ablation took %.0f s\n", seconds_since(t0));

  auto mean_of = [&](const std::string& name) {
    for (const auto& r : rows)
      if (r.name == name) return r.mean_accuracy();
    throw ValidationError("missing variant " + name);
  };
  const double full = mean_of("full");
  const double ablated = std::max({mean_of("no_sesg"), mean_of("no_sylg"), mean_of("no_fusion")});
  report(7, full >= ablated, "full model beats every branch ablation",
         fmt("full %.3f, best ablation %.3f", full, ablated));
  const double other = std::max({mean_of("concat"), mean_of("sum"), mean_of("gate")});
  report(8, full >= other, "adaptive fusion beats concat, sum and gate",
         fmt("adaptive %.3f, best alternative %.3f", full, other));
}

void interpretability_criterion(const TrainedRun& run) {
  const Model& model = run.result.best;
  std::size_t roots = 0, in_segment = 0, multi = 0;
  for (const auto& rec : prepare_all(model, run.splits.eval)) {
    const ForwardResult f = model.forward(rec);
    if (root_in_aspect(f, rec)) ++roots;
    if (rec.signal.layers.size() >= 3 && rec.size() > 4) {
      ++multi;
      if (attention_in_segment(f, rec, 3)) ++in_segment;
    }
  }
  const double share = static_cast<double>(roots) / static_cast<double>(run.splits.eval.size());
  report(9, share >= 0.8, "latent-tree root falls inside the aspect",
         fmt("%zu of %zu eval records (%.1f%%)", roots, run.splits.eval.size(), 100 * share));
  std::printf("info: segment attention peak inside the aspect clause for %zu of %zu multi-clause records\n",
              in_segment, multi);
}

void determinism_criterion() {
  Config cfg = acceptance_config();
  cfg.epochs = 5;
  const DataSplits splits = load_splits(cfg);
  const auto dir = std::filesystem::temp_directory_path() / "s2gsl_acceptance";
  std::filesystem::create_directories(dir);
  auto run = [&](const std::string& tag) {
    const TrainResult r = train(cfg, splits.train, splits.dev);
    save_checkpoint(dir / (tag + ".ckpt"), r.best);
    std::ifstream in(dir / (tag + ".ckpt"), std::ios::binary);
    std::ostringstream bytes;
    bytes << in.rdbuf();
    return std::pair{r.log_text, bytes.str()};
  };
  const auto a = run("a");
  const auto b = run("b");
  report(10, a == b && !a.first.empty(), "same config and seed give byte-identical logs and checkpoints",
         fmt("log %zu bytes, checkpoint %zu bytes", a.first.size(), a.second.size()));
}

}  // namespace

int main() {
  try {
    tree_criteria();
    band_criterion();
    gradient_criterion();
    loss_criterion();
    const TrainedRun run = training_criterion();
    ablation_criteria();
    interpretability_criterion(run);
    determinism_criterion();
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%s\n", failures == 0 ? "all criteria passed" : (std::to_string(failures) + " criteria failed").c_str());
  return failures == 0 ? 0 : 1;
}
