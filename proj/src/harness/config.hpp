#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "../model/encoder.hpp"
#include "../model/fusion.hpp"
#include "../model/sesg.hpp"
#include "../model/sylg.hpp"

namespace s2gsl {

enum class Ablation { full, no_sesg, no_sylg, no_fusion };

Ablation parse_ablation(const std::string& s);
const char* ablation_name(Ablation a);

// Flat key = value configuration. Every field has a default.
struct Config {
  // architecture
  std::size_t dim = 32;
  std::size_t layers = 4;  // constituent layers = SeSG heads
  std::size_t gcn_layers = 3;
  std::size_t sylg_heads = 4;
  std::size_t relation_dim = 16;
  std::size_t fusion_heads = 2;
  std::size_t ffn_hidden = 0;  // 0 -> 2 * dim
  std::size_t max_len = 64;
  bool encoder_mixing = false;
  bool aspect_marker = true;
  FusionMode fusion_mode = FusionMode::adaptive;
  Ablation ablation = Ablation::full;
  MttVariant mtt_variant = MttVariant::row_replace;
  bool supervise_presoftmax = false;
  bool logit_masking = false;
  AdjacencyMode adjacency = AdjacencyMode::per_layer;
  PoolMode pool = PoolMode::mean;
  Activation activation = Activation::relu;

  // objective and optimizer
  double lambda1 = 0.1;
  double lambda2 = 0.5;
  double learning_rate = 1e-3;
  double weight_decay = 1e-5;
  std::size_t batch_size = 16;
  std::size_t epochs = 20;
  std::uint64_t seed = 0;

  // data: empty paths fall back to the synthetic generator
  std::string train_data;
  std::string dev_data;
  std::string eval_data;
  std::uint64_t synthetic_seed = 0;
  std::size_t synthetic_train = 200;
  std::size_t synthetic_dev = 100;
  std::size_t synthetic_eval = 100;
  std::size_t synthetic_min_clauses = 1;
  std::size_t synthetic_max_clauses = 3;

  std::size_t ablate_seeds = 3;

  std::size_t effective_ffn_hidden() const { return ffn_hidden ? ffn_hidden : 2 * dim; }

  // Throws ValidationError for unknown keys, bad values, or inconsistent settings.
  void set(const std::string& key, const std::string& value);
  void validate() const;

  static Config parse(const std::string& text);
  static Config load(const std::filesystem::path& path);
  // Canonical key = value dump; parse(to_string()) reproduces the config.
  std::string to_string() const;

  EncoderConfig encoder() const;
  SesgConfig sesg() const;
  SylgConfig sylg() const;
  FusionConfig fusion() const;
};

// The four (lambda1, lambda2) pairs used for the public benchmarks, in the
// order laptop, restaurant, twitter, mams. Kept for reference runs.
struct LambdaPair {
  const char* dataset;
  double lambda1;
  double lambda2;
};
inline constexpr LambdaPair kBenchmarkLambdas[] = {
    {"laptop", 0.1, 0.5}, {"restaurant", 0.1, 0.45}, {"twitter", 0.35, 0.3}, {"mams", 0.4, 0.75}};

}  // namespace s2gsl
