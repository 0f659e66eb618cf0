#include "training.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "../data/synthetic.hpp"

namespace s2gsl {

Metrics metrics_from_confusion(const Confusion& confusion) {
  Metrics m;
  m.confusion = confusion;
  std::size_t correct = 0;
  for (std::size_t g = 0; g < kNumClasses; ++g)
    for (std::size_t p = 0; p < kNumClasses; ++p) {
      m.total += confusion[g][p];
      if (g == p) correct += confusion[g][p];
    }
  if (m.total == 0) throw ValidationError("cannot compute metrics over an empty dataset");
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.total);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::size_t predicted = 0, actual = 0;
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      predicted += confusion[k][c];
      actual += confusion[c][k];
    }
    const double tp = static_cast<double>(confusion[c][c]);
    m.precision[c] = predicted ? tp / static_cast<double>(predicted) : 0.0;
    m.recall[c] = actual ? tp / static_cast<double>(actual) : 0.0;
    const double denom = m.precision[c] + m.recall[c];
    m.f1[c] = denom > 0 ? 2.0 * m.precision[c] * m.recall[c] / denom : 0.0;
  }
  m.macro_f1 = (m.f1[0] + m.f1[1] + m.f1[2]) / 3.0;
  return m;
}

Prediction predict(const Model& model, const PreparedRecord& rec) {
  const ForwardResult f = model.forward(rec);
  Prediction p;
  for (std::size_t c = 0; c < kNumClasses; ++c) p.probs[c] = f.probs->value[c];
  // Lowest index wins ties.
  for (std::size_t c = 1; c < kNumClasses; ++c)
    if (p.probs[c] > p.probs[p.label]) p.label = c;
  return p;
}

std::vector<PreparedRecord> prepare_all(const Model& model, const std::vector<SentenceRecord>& records) {
  std::vector<PreparedRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(model.prepare(r));
  return out;
}

Metrics evaluate(const Model& model, const std::vector<PreparedRecord>& records) {
  if (records.empty()) throw ValidationError("cannot evaluate an empty dataset");
  Confusion confusion{};
  for (const auto& r : records) ++confusion[r.label][predict(model, r).label];
  return metrics_from_confusion(confusion);
}

std::vector<SentenceRecord> synthetic_split(const Config& cfg, const std::string& split) {
  std::size_t size = 0;
  std::uint64_t seed = cfg.synthetic_seed;
  if (split == "train") {
    size = cfg.synthetic_train;
  } else if (split == "dev" || split == "eval") {
    size = split == "dev" ? cfg.synthetic_dev : cfg.synthetic_eval;
    seed = SeededStream(cfg.synthetic_seed, "split:" + split).next_u64();
  } else {
    throw ValidationError("unknown split '" + split + "'");
  }
  SyntheticOptions opts;
  opts.min_clauses = cfg.synthetic_min_clauses;
  opts.max_clauses = cfg.synthetic_max_clauses;
  return generate_synthetic(seed, size, SyntheticLexicon::standard(), opts);
}

DataSplits load_splits(const Config& cfg) {
  DataSplits s;
  s.train = cfg.train_data.empty() ? synthetic_split(cfg, "train") : load_dataset(cfg.train_data);
  s.dev = cfg.dev_data.empty() ? synthetic_split(cfg, "dev") : load_dataset(cfg.dev_data);
  s.eval = cfg.eval_data.empty() ? synthetic_split(cfg, "eval") : load_dataset(cfg.eval_data);
  return s;
}

Adam::Adam(ParamStore& params, double lr, double weight_decay) : params_(params), lr_(lr), wd_(weight_decay) {
  for (const auto& [name, p] : params_.all())
    slots_[name] = {Matrix(p->value.rows(), p->value.cols()), Matrix(p->value.rows(), p->value.cols())};
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  for (const auto& [name, p] : params_.all()) {
    Slot& s = slots_.at(name);
    auto w = p->value.data();
    auto g = p->grad.data();
    auto m = s.m.data();
    auto v = s.v.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g[i] + wd_ * w[i];
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * gi;
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * gi * gi;
      w[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + kEps);
    }
  }
}

std::string format_epoch(const EpochLog& e) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "epoch %zu loss %.6f train_acc %.4f train_f1 %.4f dev_acc %.4f dev_f1 %.4f", e.epoch,
                e.train_loss, e.train.accuracy, e.train.macro_f1, e.dev.accuracy, e.dev.macro_f1);
  return buf;
}

namespace {

std::map<std::string, Matrix> snapshot(const ParamStore& params) {
  std::map<std::string, Matrix> out;
  for (const auto& [name, p] : params.all()) out.emplace(name, p->value);
  return out;
}

}  // namespace

TrainResult train(const Config& cfg, const std::vector<SentenceRecord>& train_set,
                  const std::vector<SentenceRecord>& dev_set, const std::function<void(const EpochLog&)>& on_epoch) {
  if (train_set.empty()) throw ValidationError("training set is empty");
  cfg.validate();
  Model model(cfg, Vocab::words_from(train_set), Vocab::labels_from(train_set));
  const auto train_prep = prepare_all(model, train_set);
  const auto dev_prep = dev_set.empty() ? train_prep : prepare_all(model, dev_set);

  Adam opt(model.params(), cfg.learning_rate, cfg.weight_decay);
  SeededStream shuffle(cfg.seed, "shuffle");
  std::vector<std::size_t> order(train_prep.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<EpochLog> log;
  std::string log_text;
  std::size_t best_epoch = 0;
  Metrics best_dev;
  std::map<std::string, Matrix> best_values = snapshot(model.params());
  std::size_t step = 0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(stop - start);
      ++step;
      model.params().zero_grad();
      for (std::size_t k = start; k < stop; ++k) {
        Var loss;
        try {
          loss = record_loss(model, train_prep[order[k]]);
        } catch (const NumericalError& e) {
          throw NumericalError("training diverged at epoch " + std::to_string(epoch) + " step " +
                               std::to_string(step) + ": " + e.what());
        }
        loss_sum += loss->value[0];
        backward(ad::affine(loss, scale));
      }
      opt.step();
    }

    EpochLog e;
    e.epoch = epoch;
    e.train_loss = loss_sum / static_cast<double>(order.size());
    e.train = evaluate(model, train_prep);
    e.dev = evaluate(model, dev_prep);
    log.push_back(e);
    log_text += format_epoch(e) + "\n";
    if (on_epoch) on_epoch(e);

    const bool better = best_epoch == 0 || e.dev.accuracy > best_dev.accuracy ||
                        (e.dev.accuracy == best_dev.accuracy && e.dev.macro_f1 > best_dev.macro_f1);
    if (better) {
      best_epoch = epoch;
      best_dev = e.dev;
      best_values = snapshot(model.params());
    }
  }
  return TrainResult{Model(cfg, model.words(), model.labels(), best_values), best_epoch, best_dev, std::move(log),
                     std::move(log_text)};
}

namespace {

constexpr char kMagic[8] = {'S', '2', 'G', 'S', 'L', 'C', 'K', 'P'};

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

void put_str(std::ostream& out, const std::string& s) {
  put_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void put_f64(std::ostream& out, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, sizeof bits);
  put_u64(out, bits);
}

class Reader {
 public:
  Reader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}

  void bytes(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw ValidationError("checkpoint " + path_ + " is truncated");
  }
  std::uint64_t u64() {
    unsigned char b[8];
    bytes(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  std::uint64_t bounded(std::uint64_t limit, const char* what) {
    const std::uint64_t v = u64();
    if (v > limit) throw ValidationError("checkpoint " + path_ + ": implausible " + what);
    return v;
  }
  std::string str() {
    std::string s(bounded(1u << 28, "string length"), '\0');
    if (!s.empty()) bytes(s.data(), s.size());
    return s;
  }
  double f64() {
    const std::uint64_t bits = u64();
    double x;
    std::memcpy(&x, &bits, sizeof x);
    return x;
  }

 private:
  std::istream& in_;
  std::string path_;
};

std::string join_lines(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& e : v) s += e + "\n";
  return s;
}

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Model& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof kMagic);
  const std::uint32_t version = kCheckpointVersion;
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>(version >> (8 * i)));
  put_str(out, model.config().to_string());
  put_str(out, join_lines(model.words().entries()));
  put_str(out, join_lines(model.labels().entries()));
  put_u64(out, model.params().all().size());
  for (const auto& [name, p] : model.params().all()) {
    put_str(out, name);
    put_u64(out, p->value.rows());
    put_u64(out, p->value.cols());
    for (double x : p->value.data()) put_f64(out, x);
  }
  if (!out) throw ValidationError("failed while writing checkpoint " + path.string());
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint " + path.string());
  Reader r(in, path.string());
  char magic[8];
  r.bytes(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) throw ValidationError(path.string() + " is not a checkpoint");
  unsigned char vb[4];
  r.bytes(reinterpret_cast<char*>(vb), 4);
  const std::uint32_t version = vb[0] | (vb[1] << 8) | (vb[2] << 16) | (static_cast<std::uint32_t>(vb[3]) << 24);
  if (version != kCheckpointVersion)
    throw ValidationError("checkpoint format version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  Config cfg = Config::parse(r.str());
  Vocab words(split_lines(r.str()));
  Vocab labels(split_lines(r.str()));
  const std::uint64_t count = r.bounded(1u << 20, "parameter count");
  std::map<std::string, Matrix> values;
  for (std::uint64_t k = 0; k < count; ++k) {
    std::string name = r.str();
    const std::uint64_t rows = r.bounded(1u << 24, "row count");
    const std::uint64_t cols = r.bounded(1u << 24, "column count");
    if (rows * cols > (1u << 26)) throw ValidationError("checkpoint parameter '" + name + "' is implausibly large");
    std::vector<double> data(rows * cols);
    for (double& x : data) x = r.f64();
    if (!values.emplace(name, Matrix(rows, cols, std::move(data))).second)
      throw ValidationError("checkpoint repeats parameter '" + name + "'");
  }
  return Model(cfg, std::move(words), std::move(labels), values);
}

}  // namespace s2gsl
