// Command-line front end. Talks to the model only through the C interface.

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "s2gsl/s2gsl.h"

namespace {

void print_line(const char* line, void*) { std::printf("%s\n", line); }

// 0 success, 1 validation failure, 2 numerical failure.
int finish(s2gsl_status s) {
  if (s != S2GSL_OK) std::fprintf(stderr, "error: %s\n", s2gsl_last_error());
  std::fflush(stdout);
  return static_cast<int>(s);
}

struct ModelHandle {
  s2gsl_model* ptr = nullptr;
  ~ModelHandle() { s2gsl_model_free(ptr); }
};

const char* class_name(int c) {
  static const char* names[] = {"positive", "negative", "neutral"};
  return names[c];
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Segment and syntax graph structure learning for aspect sentiment"};
  app.require_subcommand(1);

  std::string config, out_dir = "run", checkpoint, data;
  std::uint64_t seed = 0, trials = 100, record_id = 0, size = 0;

  auto* train = app.add_subcommand("train", "Train a model and write model.ckpt and metrics.log");
  train->add_option("--config", config, "Config file")->required();
  train->add_option("--out", out_dir, "Output directory")->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Score a dataset with a checkpoint");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  eval->add_option("--data", data, "Dataset file")->required();

  auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of the full objective");
  grad->add_option("--seed", seed, "Parameter seed")->capture_default_str();

  auto* orc = app.add_subcommand("oracle-check", "Compare tree inference and segment masks with brute force");
  orc->add_option("--trials", trials, "Random instances")->capture_default_str();

  auto* insp = app.add_subcommand("inspect", "Dump attention, tree and stream-weight artifacts for one record");
  insp->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  insp->add_option("--record-id", record_id, "0-based record index")->required();
  insp->add_option("--out", out_dir, "Output directory")->required();
  insp->add_option("--data", data, "Dataset file (default: the checkpoint's evaluation split)");

  auto* abl = app.add_subcommand("ablate", "Train all ablation and fusion variants and compare");
  abl->add_option("--config", config, "Config file")->required();

  auto* gen = app.add_subcommand("gen-data", "Write a synthetic dataset");
  gen->add_option("--seed", seed, "Generator seed")->required();
  gen->add_option("--size", size, "Number of records")->required();
  std::string gen_out;
  gen->add_option("--out", gen_out, "Output file")->required();

  auto* params = app.add_subcommand("params", "Count trainable parameters for a config");
  params->add_option("--config", config, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (*train) return finish(s2gsl_train(config.c_str(), out_dir.c_str(), print_line, nullptr));

  if (*eval) {
    ModelHandle m;
    if (s2gsl_status s = s2gsl_model_load(checkpoint.c_str(), &m.ptr); s != S2GSL_OK) return finish(s);
    s2gsl_metrics r{};
    if (s2gsl_status s = s2gsl_model_evaluate(m.ptr, data.c_str(), &r); s != S2GSL_OK) return finish(s);
    std::printf("records %llu\naccuracy %.4f\nmacro_f1 %.4f\n", static_cast<unsigned long long>(r.total), r.accuracy,
                r.macro_f1);
    for (int c = 0; c < 3; ++c)
      std::printf("%-8s precision %.4f recall %.4f f1 %.4f\n", class_name(c), r.precision[c], r.recall[c], r.f1[c]);
    std::printf("confusion (rows gold, columns predicted)\n");
    for (int g = 0; g < 3; ++g)
      std::printf("  %llu %llu %llu\n", static_cast<unsigned long long>(r.confusion[g * 3]),
                  static_cast<unsigned long long>(r.confusion[g * 3 + 1]),
                  static_cast<unsigned long long>(r.confusion[g * 3 + 2]));
    return finish(S2GSL_OK);
  }

  if (*grad) return finish(s2gsl_gradcheck(seed, print_line, nullptr));
  if (*orc) return finish(s2gsl_oracle_check(trials, print_line, nullptr));

  if (*insp) {
    ModelHandle m;
    if (s2gsl_status s = s2gsl_model_load(checkpoint.c_str(), &m.ptr); s != S2GSL_OK) return finish(s);
    return finish(s2gsl_model_inspect(m.ptr, data.empty() ? nullptr : data.c_str(), record_id, out_dir.c_str(),
                                      print_line, nullptr));
  }

  if (*abl) return finish(s2gsl_ablate(config.c_str(), print_line, nullptr));
  if (*gen) return finish(s2gsl_generate_data(seed, size, gen_out.c_str()));

  if (*params) {
    std::uint64_t count = 0;
    s2gsl_status s = s2gsl_config_param_count(config.c_str(), print_line, nullptr, &count);
    if (s == S2GSL_OK) std::printf("total %llu\n", static_cast<unsigned long long>(count));
    return finish(s);
  }
  return 1;
}
