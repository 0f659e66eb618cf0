#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "model.hpp"

namespace s2gsl {

using Confusion = std::array<std::array<std::size_t, kNumClasses>, kNumClasses>;  // [gold][pred]

struct Metrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::array<double, kNumClasses> precision{};
  std::array<double, kNumClasses> recall{};
  std::array<double, kNumClasses> f1{};
  Confusion confusion{};
  std::size_t total = 0;
};

// Empty confusion matrices are rejected.
Metrics metrics_from_confusion(const Confusion& confusion);

struct Prediction {
  std::size_t label = 0;
  std::array<double, kNumClasses> probs{};
};

Prediction predict(const Model& model, const PreparedRecord& rec);
std::vector<PreparedRecord> prepare_all(const Model& model, const std::vector<SentenceRecord>& records);
Metrics evaluate(const Model& model, const std::vector<PreparedRecord>& records);

struct DataSplits {
  std::vector<SentenceRecord> train;
  std::vector<SentenceRecord> dev;
  std::vector<SentenceRecord> eval;
};

// Files named in the config, falling back to synthetic splits drawn from
// independent streams of synthetic_seed.
DataSplits load_splits(const Config& cfg);
std::vector<SentenceRecord> synthetic_split(const Config& cfg, const std::string& split);

// Adam over every parameter in the store; weight decay is added to the
// gradient (L2), not decoupled.
class Adam {
 public:
  Adam(ParamStore& params, double lr, double weight_decay);
  void step();

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  struct Slot {
    Matrix m;
    Matrix v;
  };
  ParamStore& params_;
  double lr_;
  double wd_;
  std::size_t t_ = 0;
  std::map<std::string, Slot> slots_;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  Metrics train;
  Metrics dev;
};

std::string format_epoch(const EpochLog& e);

struct TrainResult {
  Model best;
  std::size_t best_epoch = 0;
  Metrics best_dev;
  std::vector<EpochLog> log;
  std::string log_text;
};

// Adam with L2 weight decay, gradients accumulated over each batch in record
// order. `on_epoch` sees each log line as it is produced.
TrainResult train(const Config& cfg, const std::vector<SentenceRecord>& train_set,
                  const std::vector<SentenceRecord>& dev_set,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

// Versioned binary container.
inline constexpr std::uint32_t kCheckpointVersion = 1;
void save_checkpoint(const std::filesystem::path& path, const Model& model);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace s2gsl
