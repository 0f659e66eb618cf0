#include "s2gsl/s2gsl.h"

#include <cstdio>
#include <exception>
#include <fstream>
#include <memory>
#include <new>
#include <string>

#include "data/synthetic.hpp"
#include "harness/ablate.hpp"
#include "harness/checks.hpp"
#include "harness/inspect.hpp"
#include "harness/training.hpp"

struct s2gsl_model {
  explicit s2gsl_model(s2gsl::Model m) : model(std::move(m)) {}
  s2gsl::Model model;
};

namespace {

thread_local std::string g_error;

template <class F>
s2gsl_status guarded(F&& f) {
  g_error.clear();
  try {
    return f();
  } catch (const s2gsl::NumericalError& e) {
    g_error = e.what();
    return S2GSL_NUMERICAL;
  } catch (const s2gsl::ValidationError& e) {
    g_error = e.what();
    return S2GSL_VALIDATION;
  } catch (const std::bad_alloc&) {
    g_error = "out of memory";
    return S2GSL_VALIDATION;
  } catch (const std::exception& e) {
    g_error = e.what();
    return S2GSL_VALIDATION;
  }
}

s2gsl_status fail(s2gsl_status s, std::string msg) {
  g_error = std::move(msg);
  return s;
}

void emit(s2gsl_line_fn fn, void* user, const std::string& line) {
  if (fn) fn(line.c_str(), user);
}

void require(const void* p, const char* what) {
  if (!p) throw s2gsl::ValidationError(std::string(what) + " must not be NULL");
}

}  // namespace

extern "C" {

int s2gsl_abi_version(void) { return S2GSL_ABI_VERSION; }

const char* s2gsl_last_error(void) { return g_error.c_str(); }

s2gsl_status s2gsl_train(const char* config_path, const char* out_dir, s2gsl_line_fn on_line, void* user) {
  return guarded([&] {
    require(config_path, "config_path");
    require(out_dir, "out_dir");
    const s2gsl::Config cfg = s2gsl::Config::load(config_path);
    const s2gsl::DataSplits data = s2gsl::load_splits(cfg);
    const std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (!std::filesystem::is_directory(dir)) throw s2gsl::ValidationError("cannot create " + dir.string());
    std::ofstream log(dir / "metrics.log", std::ios::trunc);
    if (!log) throw s2gsl::ValidationError("cannot write " + (dir / "metrics.log").string());
    const s2gsl::TrainResult r = s2gsl::train(cfg, data.train, data.dev, [&](const s2gsl::EpochLog& e) {
      const std::string line = s2gsl::format_epoch(e);
      log << line << '\n' << std::flush;
      emit(on_line, user, line);
    });
    s2gsl::save_checkpoint(dir / "model.ckpt", r.best);
    emit(on_line, user, "best epoch " + std::to_string(r.best_epoch) + ", checkpoint " + (dir / "model.ckpt").string());
    return S2GSL_OK;
  });
}

s2gsl_status s2gsl_model_load(const char* checkpoint_path, s2gsl_model** out) {
  return guarded([&] {
    require(checkpoint_path, "checkpoint_path");
    require(out, "out");
    *out = nullptr;
    *out = new s2gsl_model(s2gsl::load_checkpoint(checkpoint_path));
    return S2GSL_OK;
  });
}

void s2gsl_model_free(s2gsl_model* model) { delete model; }

s2gsl_status s2gsl_model_param_count(const s2gsl_model* model, uint64_t* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = s2gsl::count_params(model->model.params());
    return S2GSL_OK;
  });
}

s2gsl_status s2gsl_model_evaluate(const s2gsl_model* model, const char* data_path, s2gsl_metrics* out) {
  return guarded([&] {
    require(model, "model");
    require(data_path, "data_path");
    require(out, "out");
    const auto records = s2gsl::load_dataset(data_path);
    const s2gsl::Metrics m = s2gsl::evaluate(model->model, s2gsl::prepare_all(model->model, records));
    out->accuracy = m.accuracy;
    out->macro_f1 = m.macro_f1;
    for (std::size_t c = 0; c < 3; ++c) {
      out->precision[c] = m.precision[c];
      out->recall[c] = m.recall[c];
      out->f1[c] = m.f1[c];
      for (std::size_t p = 0; p < 3; ++p) out->confusion[c * 3 + p] = m.confusion[c][p];
    }
    out->total = m.total;
    return S2GSL_OK;
  });
}

s2gsl_status s2gsl_model_predict(const s2gsl_model* model, const char* record_line, double probs[3]) {
  return guarded([&] {
    require(model, "model");
    require(record_line, "record_line");
    require(probs, "probs");
    const auto rec = s2gsl::parse_record_line(record_line);
    const s2gsl::Prediction p = s2gsl::predict(model->model, model->model.prepare(rec));
    for (std::size_t c = 0; c < 3; ++c) probs[c] = p.probs[c];
    return S2GSL_OK;
  });
}

s2gsl_status s2gsl_model_inspect(const s2gsl_model* model, const char* data_path, uint64_t record_id,
                                 const char* out_dir, s2gsl_line_fn on_line, void* user) {
  return guarded([&] {
    require(model, "model");
    require(out_dir, "out_dir");
    const auto records =
        data_path ? s2gsl::load_dataset(data_path) : s2gsl::load_splits(model->model.config()).eval;
    if (record_id >= records.size())
      return fail(S2GSL_VALIDATION, "record id " + std::to_string(record_id) + " out of range (dataset has " +
                                        std::to_string(records.size()) + " records)");
    for (const auto& p : s2gsl::inspect_record(model->model, records[record_id], record_id, out_dir))
      emit(on_line, user, p.string());
    return S2GSL_OK;
  });
}

s2gsl_status s2gsl_config_param_count(const char* config_path, s2gsl_line_fn on_line, void* user, uint64_t* out) {
  return guarded([&] {
    require(config_path, "config_path");
    require(out, "out");
    const s2gsl::Config cfg = s2gsl::Config::load(config_path);
    const auto train = cfg.train_data.empty() ? s2gsl::synthetic_split(cfg, "train") : s2gsl::load_dataset(cfg.train_data);
    const s2gsl::Model model(cfg, s2gsl::Vocab::words_from(train), s2gsl::Vocab::labels_from(train));
    for (const auto& [name, p] : model.params().all())
      emit(on_line, user, name + " " + p->value.shape_str() + " " + std::to_string(p->value.size()));
    *out = s2gsl::count_params(model.params());
    return S2GSL_OK;
  });
}

s2gsl_status s2gsl_gradcheck(uint64_t seed, s2gsl_line_fn on_line, void* user) {
  return guarded([&] {
    const s2gsl::GradCheckReport r = s2gsl::model_grad_check(seed);
    for (const auto& e : r.entries) {
      char buf[256];
      std::snprintf(buf, sizeof buf, "%-34s coords %4zu  max_rel %.3e  max_abs %.3e  %s", e.name.c_str(), e.coords,
                    e.max_rel_error, e.max_abs_error, e.passed ? "ok" : "FAIL");
      emit(on_line, user, buf);
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "worst relative error %.3e", r.worst_rel_error());
    emit(on_line, user, buf);
    if (!r.passed) return fail(S2GSL_NUMERICAL, "gradient check failed");
    return S2GSL_OK;
  });
}

s2gsl_status s2gsl_oracle_check(uint64_t trials, s2gsl_line_fn on_line, void* user) {
  return guarded([&] {
    if (trials == 0) throw s2gsl::ValidationError("trials must be >= 1");
    bool ok = true;
    for (auto variant : {s2gsl::MttVariant::row_replace, s2gsl::MttVariant::literal}) {
      const auto t = s2gsl::tree_oracle_check(trials, 0, variant);
      const bool pass = t.max_edge_error <= 1e-8 && t.max_root_error <= 1e-8;
      const bool shipped = variant == s2gsl::MttVariant::row_replace;
      if (shipped) ok = ok && pass;
      char buf[256];
      std::snprintf(buf, sizeof buf,
                    "tree %-11s instances %zu  edge_err %.3e  root_err %.3e  root_sum_err %.3e  parent_sum_err %.3e  "
                    "%s%s",
                    shipped ? "row_replace" : "literal", t.instances, t.max_edge_error, t.max_root_error,
                    t.max_root_sum_error, t.max_parent_sum_error, pass ? "match" : "MISMATCH",
                    shipped ? "" : " (reference only)");
      emit(on_line, user, buf);
    }
    const auto b = s2gsl::segment_band_check(trials, 0);
    ok = ok && b.mismatches == 0;
    emit(on_line, user,
         "segment band instances " + std::to_string(b.instances) + "  mismatches " + std::to_string(b.mismatches));
    if (!ok) return fail(S2GSL_NUMERICAL, "oracle check failed");
    return S2GSL_OK;
  });
}

s2gsl_status s2gsl_ablate(const char* config_path, s2gsl_line_fn on_line, void* user) {
  return guarded([&] {
    require(config_path, "config_path");
    const s2gsl::Config cfg = s2gsl::Config::load(config_path);
    const auto rows = s2gsl::run_ablation(cfg, s2gsl::ablation_variants(),
                                          [&](const std::string& line) { emit(on_line, user, line); });
    std::string table = s2gsl::format_ablation_table(rows);
    std::size_t start = 0;
    while (start < table.size()) {
      const std::size_t nl = table.find('\n', start);
      emit(on_line, user, table.substr(start, nl - start));
      start = nl == std::string::npos ? table.size() : nl + 1;
    }
    return S2GSL_OK;
  });
}

s2gsl_status s2gsl_generate_data(uint64_t seed, uint64_t size, const char* out_path) {
  return guarded([&] {
    require(out_path, "out_path");
    if (size == 0) throw s2gsl::ValidationError("size must be >= 1");
    s2gsl::write_dataset(out_path, s2gsl::generate_synthetic(seed, size));
    return S2GSL_OK;
  });
}

}  // extern "C"
